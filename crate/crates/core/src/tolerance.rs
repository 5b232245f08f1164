/// Thresholds for rank decisions, residual certification and eigenvalue grouping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value threshold for rank and kernel decisions.
    pub rank_tol: f64,
    /// Relative bound every certified residual must meet.
    pub residual_tol: f64,
    /// Radius below which eigenvalues are grouped or snapped to the real axis.
    pub cluster_radius: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_tol: 1e-10, residual_tol: 1e-8, cluster_radius: 1e-7 }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, residual_tol: f64, cluster_radius: f64) -> Self {
        Tolerance { rank_tol, residual_tol, cluster_radius }
    }

    /// Every threshold scaled by `factor`, for a looser or stricter run.
    pub fn scaled(self, factor: f64) -> Self {
        Tolerance {
            rank_tol: self.rank_tol * factor,
            residual_tol: self.residual_tol * factor,
            cluster_radius: self.cluster_radius * factor,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.rank_tol, self.residual_tol, self.cluster_radius].iter().all(|t| t.is_finite() && *t > 0.0)
    }
}
