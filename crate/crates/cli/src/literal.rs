//! Inline literals: quaternions such as `1-2.5i+k` and block lists such as
//! `0:2:+,1+2i:1`.

use num_complex::Complex64;
use quatpolar::canonical::{CanonicalBlock, Sign};
use quatpolar::Quaternion;

use crate::CliError;

/// Splits `s` into signed terms, keeping exponent signs inside numbers.
fn terms(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    for ch in s.chars().filter(|c| !c.is_whitespace()) {
        let in_exponent = cur.ends_with(['e', 'E']) && cur.len() > 1;
        if (ch == '+' || ch == '-') && !cur.is_empty() && !in_exponent {
            out.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn coefficient(body: &str, whole: &str) -> Result<f64, CliError> {
    match body {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => body
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("cannot read `{whole}` as a number"))),
    }
}

/// Parses sums of real, `i`, `j` and `k` terms.
pub fn parse_quaternion(s: &str) -> Result<Quaternion, CliError> {
    let parts = terms(s);
    if parts.is_empty() {
        return Err(CliError::Input("empty quaternion literal".into()));
    }
    let mut q = [0.0; 4];
    for t in &parts {
        let slot = match t.chars().last() {
            Some('i') => 1,
            Some('j') => 2,
            Some('k') => 3,
            _ => 0,
        };
        let body = if slot == 0 { t.as_str() } else { &t[..t.len() - 1] };
        q[slot] += coefficient(body, t)?;
    }
    Ok(Quaternion::new(q[0], q[1], q[2], q[3]))
}

fn parse_eigenvalue(s: &str) -> Result<Complex64, CliError> {
    let q = parse_quaternion(s)?;
    if q.j != 0.0 || q.k != 0.0 {
        return Err(CliError::Input(format!("eigenvalue `{s}` must be complex (no j or k part)")));
    }
    Ok(Complex64::new(q.re, q.i))
}

/// `λ:k:η` for real `λ`, `λ:k` for nonreal `λ` in the upper half-plane.
pub fn parse_blocks(spec: &str) -> Result<Vec<CanonicalBlock>, CliError> {
    let mut blocks = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let fields: Vec<&str> = item.split(':').collect();
        let bad = |why: &str| CliError::Input(format!("block `{item}`: {why}"));
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad("expected lambda:size or lambda:size:sign"));
        }
        let lambda = parse_eigenvalue(fields[0])?;
        let size: usize = fields[1].parse().map_err(|_| bad("size must be a positive integer"))?;
        let block = match (lambda.im == 0.0, fields.get(2)) {
            (true, Some(&"+")) => CanonicalBlock::real(lambda.re, size, Sign::Plus),
            (true, Some(&"-")) => CanonicalBlock::real(lambda.re, size, Sign::Minus),
            (true, Some(_)) => return Err(bad("sign must be + or -")),
            (true, None) => return Err(bad("a real eigenvalue needs a sign")),
            (false, None) => CanonicalBlock::nonreal(lambda, size),
            (false, Some(_)) => return Err(bad("a nonreal eigenvalue takes no sign")),
        };
        block.validate().map_err(|e| bad(&e.to_string()))?;
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(CliError::Input("empty block list".into()));
    }
    Ok(blocks)
}
