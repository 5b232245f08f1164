//! Standard (right) eigenvalues and their clustering.
//!
//! `ω(A)` carries each standard eigenvalue `λ` of `A` together with `λ̄`. Real
//! eigenvalues therefore appear with doubled multiplicity, nonreal ones once in
//! each half-plane.

use num_complex::Complex64;

use super::linalg::{decompose, spectral_norm};
use super::matrix::QMatrix;
use super::omega::embed;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// A group of numerically coincident standard eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// Representative in the closed upper half-plane; exactly real for real clusters.
    pub value: Complex64,
    /// Quaternion algebraic multiplicity.
    pub multiplicity: usize,
    /// Largest distance of a computed eigenvalue from the representative.
    pub spread: f64,
}

impl EigenCluster {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// The `2n` eigenvalues of `ω(A)`.
pub fn embedded_eigenvalues(a: &QMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    Ok(decompose(&embed(a), true, |w| w.eigenvalues()).0)
}

struct Group {
    members: Vec<Complex64>,
}

impl Group {
    fn centroid(&self) -> Complex64 {
        self.members.iter().sum::<Complex64>() / self.members.len() as f64
    }

    fn spread_about(&self, c: Complex64) -> f64 {
        self.members.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
    }
}

/// How far apart the eigenvalues of a group of size `size` may lie. A Jordan
/// block of order `k` perturbed by `ε` splits into a circle of radius `ε^{1/k}`,
/// so the admissible radius grows with the largest block the group could hold.
fn admissible_radius(size: usize, eps: f64) -> f64 {
    eps.powf(1.0 / size.max(1) as f64)
}

/// Clusters the standard eigenvalues of `A`; multiplicities sum to `n`.
pub fn eigen_clusters(a: &QMatrix, tol: &Tolerance) -> Result<Vec<EigenCluster>> {
    let values = embedded_eigenvalues(a)?;
    let scale = spectral_norm(a).max(1.0);
    let eps = (tol.cluster_radius * scale).min(0.5);
    let mut groups: Vec<Group> = values.iter().map(|&z| Group { members: vec![z] }).collect();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for p in 0..groups.len() {
            let cp = groups[p].centroid();
            for (q, g) in groups.iter().enumerate().skip(p + 1) {
                let d = (cp - g.centroid()).norm();
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((p, q, d));
                }
            }
        }
        let Some((p, q, _)) = best else { break };
        let mut merged: Vec<Complex64> = groups[p].members.clone();
        merged.extend_from_slice(&groups[q].members);
        let g = Group { members: merged };
        let c = g.centroid();
        let spread = g.spread_about(c);
        if spread > admissible_radius(g.members.len(), eps) {
            break;
        }
        groups.swap_remove(q);
        groups[p] = g;
    }

    let mut out = Vec::new();
    let mut lower: Vec<(Complex64, usize)> = Vec::new();
    for g in &groups {
        let c = g.centroid();
        let spread = g.spread_about(c);
        let size = g.members.len();
        if c.im.abs() <= spread.max(tol.cluster_radius) {
            if size % 2 != 0 {
                return Err(Error::Ambiguity(format!(
                    "eigenvalue cluster near {} has odd embedded multiplicity {size}",
                    c.re
                )));
            }
            out.push(EigenCluster { value: Complex64::new(c.re, 0.0), multiplicity: size / 2, spread });
        } else if c.im > 0.0 {
            out.push(EigenCluster { value: c, multiplicity: size, spread });
        } else {
            lower.push((c, size));
        }
    }
    // every nonreal cluster must be mirrored in the lower half-plane
    for cl in out.iter().filter(|c| !c.is_real()) {
        let mirrored = lower.iter().position(|&(z, s)| {
            s == cl.multiplicity && (z.conj() - cl.value).norm() <= admissible_radius(s, eps)
        });
        match mirrored {
            Some(i) => {
                lower.swap_remove(i);
            }
            None => {
                return Err(Error::Ambiguity(format!(
                    "eigenvalue cluster at {} has no conjugate partner",
                    cl.value
                )))
            }
        }
    }
    if !lower.is_empty() {
        return Err(Error::Ambiguity("unpaired eigenvalue cluster in the lower half-plane".into()));
    }
    out.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(out)
}

/// The `n` standard eigenvalues of `A`, listed with multiplicity, each in the
/// closed upper half-plane.
pub fn right_eigenvalues(a: &QMatrix, tol: &Tolerance) -> Result<Vec<Complex64>> {
    let clusters = eigen_clusters(a, tol)?;
    Ok(clusters
        .iter()
        .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
        .collect())
}
