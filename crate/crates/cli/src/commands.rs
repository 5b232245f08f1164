use std::io::Read as _;
use std::path::Path;

use quatpolar::canonical::{canonical_form, CanonicalBlock};
use quatpolar::gen::{gen_polar_instance, gen_selfadjoint_pair, Seed};
use quatpolar::indefinite::{is_h_selfadjoint, HForm};
use quatpolar::polar::{polar_decompose, polar_exists, verify_polar, PolarResiduals};
use quatpolar::quat::linalg::spectral_norm;
use quatpolar::sqroot::sqrt_build;
use quatpolar::witt::{witt_basis, witt_from_params, SubspaceMap, WittParams};
use quatpolar::{QMatrix, Tolerance};
use serde_json::json;

use crate::literal::{parse_blocks, parse_quaternion};
use crate::matfile::MatrixFile;
use crate::report::{Format, Report};
use crate::{CliError, Common};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKind {
    /// An H-selfadjoint pair (sections A, H and the basis S).
    Pair,
    /// A decomposable X with a certified decomposition (sections X, H, U, A).
    Polar,
}

fn read_file(path: &Path) -> Result<MatrixFile, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    MatrixFile::parse(&text)
}

fn form(file: &MatrixFile, name: &str, tol: &Tolerance) -> Result<HForm, CliError> {
    Ok(HForm::new(file.require(name)?.clone(), tol)?)
}

/// The block list in the syntax `gen` reads.
fn block_spec(blocks: &[CanonicalBlock]) -> String {
    let items: Vec<String> = blocks
        .iter()
        .map(|b| match b.sign {
            Some(s) => format!("{}:{}:{}", b.lambda.re, b.size, s),
            None => format!("{}+{}i:{}", b.lambda.re, b.lambda.im, b.size),
        })
        .collect();
    items.join(",")
}

fn block_list(blocks: &[CanonicalBlock]) -> serde_json::Value {
    blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().into()
}

fn polar_residuals(r: &PolarResiduals) -> serde_json::Value {
    json!({
        "factorization": r.factorization,
        "unitarity": r.unitarity,
        "selfadjointness": r.selfadjointness,
        "kernel": r.kernel,
        "certified": r.certified,
    })
}

pub fn canonical(path: &Path, common: &Common) -> Result<String, CliError> {
    let tol = common.tolerance()?;
    let file = read_file(path)?;
    let h = form(&file, "H", &tol)?;
    let a = file.require("A")?;
    let cf = canonical_form(a, &h, &tol)?;
    let mut r = Report::new(file.n);
    r.field("command", "canonical")
        .field("blocks", block_list(&cf.blocks))
        .field("block_spec", block_spec(&cf.blocks))
        .field(
            "residuals",
            json!({ "similarity": cf.residuals.similarity, "congruence": cf.residuals.congruence }),
        )
        .tolerances(&tol)
        .matrix("S", &cf.s);
    Ok(r.render(common.format))
}

pub fn sqrt(path: &Path, common: &Common) -> Result<String, CliError> {
    let tol = common.tolerance()?;
    let file = read_file(path)?;
    let h = form(&file, "H", &tol)?;
    let b = file.require("B")?;
    let a = sqrt_build(b, &h, &tol, None)?;
    let square = (&(&a * &a) - b).frobenius_norm() / (1.0 + spectral_norm(b));
    let mut r = Report::new(file.n);
    r.field("command", "sqrt")
        .field(
            "residuals",
            json!({ "square": square, "selfadjointness": is_h_selfadjoint(&a, &h, &tol).residual }),
        )
        .tolerances(&tol)
        .matrix("A", &a);
    Ok(r.render(common.format))
}

/// A parameter given inline as a 1x1 quaternion, or as a file with section `P`.
fn param(arg: &str) -> Result<QMatrix, CliError> {
    if let Ok(q) = parse_quaternion(arg) {
        return Ok(QMatrix::from_rows(vec![vec![q]]));
    }
    Ok(read_file(Path::new(arg))?.require("P")?.clone())
}

pub fn witt(path: &Path, params: [Option<&str>; 3], common: &Common) -> Result<String, CliError> {
    let tol = common.tolerance()?;
    let file = read_file(path)?;
    let h1 = form(&file, "H", &tol)?;
    let h2 = if file.get("H2").is_some() { form(&file, "H2", &tol)? } else { h1.clone() };
    let v = file.require("V")?;
    let w = file.get("W").unwrap_or(v);
    let u0 = SubspaceMap::new(v.clone(), w.clone())?;
    let basis = witt_basis(&u0, &h1, &h2, &tol)?;
    let mut p = WittParams::trivial(&basis);
    for (slot, arg) in [&mut p.p1, &mut p.p2, &mut p.p3].into_iter().zip(params) {
        if let Some(arg) = arg {
            *slot = param(arg)?;
        }
    }
    let u = witt_from_params(&u0, &basis, &p, &h1, &h2, &tol)?;
    let unitarity = (&(&(&u.conj_transpose() * h2.matrix()) * &u) - h1.matrix()).frobenius_norm()
        / h1.matrix().frobenius_norm();
    let restriction = (&(&u * v) - w).frobenius_norm() / w.frobenius_norm().max(1.0);
    let pr = basis.profile;
    let mut r = Report::new(file.n);
    r.field("command", "witt")
        .field("profile", json!({ "m0": pr.m0, "m_plus": pr.m_plus, "m_minus": pr.m_minus }))
        .field("free_dim", basis.free_dim())
        .field("residuals", json!({ "unitarity": unitarity, "restriction": restriction }))
        .tolerances(&tol)
        .matrix("U", &u);
    Ok(r.render(common.format))
}

pub fn polar(path: &Path, report_only: bool, common: &Common) -> Result<String, CliError> {
    let tol = common.tolerance()?;
    let file = read_file(path)?;
    let h = form(&file, "H", &tol)?;
    let x = file.require("X")?;
    let pr = polar_exists(x, &h, &tol)?;
    let mut r = Report::new(file.n);
    r.field("command", "polar").field("exists", pr.exists);
    let mut conditions = serde_json::Map::new();
    for (name, c) in [("(i)", &pr.cond_i), ("(ii)", &pr.cond_ii), ("(iii)", &pr.cond_iii)] {
        let verdict = if c.holds { "pass" } else { "fail" };
        conditions.insert(format!("condition {name}"), format!("{verdict}: {}", c.witness).into());
    }
    r.field("conditions", serde_json::Value::Object(conditions))
        .field("gram_blocks", block_list(&pr.form.blocks))
        .tolerances(&tol);
    if let Some(failure) = pr.failure() {
        return Err(CliError::Nonexistence { message: failure, report: Some(r.render(common.format)) });
    }
    if !report_only {
        let d = polar_decompose(x, &h, &tol)?;
        r.field("residuals", polar_residuals(&d.residuals))
            .matrix("X", x)
            .matrix("H", h.matrix())
            .matrix("U", &d.u)
            .matrix("A", &d.a);
    }
    Ok(r.render(common.format))
}

pub fn verify(path: &Path, common: &Common) -> Result<String, CliError> {
    let tol = common.tolerance()?;
    let file = read_file(path)?;
    let h = form(&file, "H", &tol)?;
    let res = verify_polar(file.require("X")?, &h, file.require("U")?, file.require("A")?, &tol);
    let mut r = Report::new(file.n);
    r.field("command", "verify").field("residuals", polar_residuals(&res)).tolerances(&tol);
    let out = r.render(common.format);
    if res.certified {
        Ok(out)
    } else {
        Err(CliError::Nonexistence {
            message: "U and A do not form a polar decomposition of X within the tolerances".into(),
            report: Some(out),
        })
    }
}

/// Always writes a matrix file.
pub fn gen(spec: &str, seed: u64, kind: GenKind, cond: f64) -> Result<String, CliError> {
    let blocks = parse_blocks(spec)?;
    if !(cond.is_finite() && cond >= 1.0) {
        return Err(CliError::Input("--cond must be a finite number >= 1".into()));
    }
    let mut r = Report::new(blocks.iter().map(CanonicalBlock::dim).sum());
    r.field("command", "gen").field("blocks", block_spec(&blocks)).field("seed", seed);
    match kind {
        GenKind::Pair => {
            let (a, h, s) = gen_selfadjoint_pair(&blocks, Seed(seed), cond)?;
            r.matrix("A", &a).matrix("H", h.matrix()).matrix("S", &s);
        }
        GenKind::Polar => {
            let (x, h, d) = gen_polar_instance(&blocks, Seed(seed))?;
            r.field("residuals", polar_residuals(&d.residuals))
                .matrix("X", &x)
                .matrix("H", h.matrix())
                .matrix("U", &d.u)
                .matrix("A", &d.a);
        }
    }
    Ok(r.render(Format::Json))
}
