//! Plain-text group descriptions. Grammar in `docs/group_format.md`.

use std::fmt;
use std::str::FromStr;

use super::{GroupError, GroupSpec, Polynomial, QuasiNorm, QuasiTriangle};
use crate::scalar::Real;

fn perr(line: usize, message: impl Into<String>) -> GroupError {
    GroupError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses `0.5 x1 y2 - 0.5 x2 y1`, `x1^2`, `-3`, … over `nx` x-variables and
/// (when `with_y`) as many y-variables.
fn parse_poly<T: Real>(src: &str, nx: usize, with_y: bool, line: usize) -> Result<Polynomial<T>, GroupError> {
    let nvars = if with_y { 2 * nx } else { nx };
    let mut poly = Polynomial::zero(nvars);
    let mut sign = 1.0;
    let mut coeff: Option<f64> = None;
    let mut powers = vec![0u8; nvars];
    let mut open = false;

    let flush =
        |sign: &mut f64, coeff: &mut Option<f64>, powers: &mut Vec<u8>, open: &mut bool, poly: &mut Polynomial<T>| {
            if *open {
                let c = *sign * coeff.unwrap_or(1.0);
                *poly = std::mem::replace(poly, Polynomial::zero(nvars)).with_term(T::lit(c), powers);
            }
            *sign = 1.0;
            *coeff = None;
            powers.iter_mut().for_each(|p| *p = 0);
            *open = false;
        };

    for tok in src.split_whitespace() {
        match tok {
            "+" | "-" => {
                flush(&mut sign, &mut coeff, &mut powers, &mut open, &mut poly);
                sign = if tok == "-" { -1.0 } else { 1.0 };
                continue;
            }
            "*" => continue,
            _ => {}
        }
        let first = tok.chars().next().unwrap();
        if first == 'x' || first == 'y' {
            if first == 'y' && !with_y {
                return Err(perr(line, format!("`{tok}`: y-variables only appear in law lines")));
            }
            let (var, exp) = match tok[1..].split_once('^') {
                Some((v, e)) => (
                    v,
                    e.parse::<u8>()
                        .map_err(|_| perr(line, format!("bad exponent in `{tok}`")))?,
                ),
                None => (&tok[1..], 1),
            };
            let idx: usize = var.parse().map_err(|_| perr(line, format!("bad variable `{tok}`")))?;
            if idx == 0 || idx > nx {
                return Err(perr(line, format!("variable `{tok}` out of range 1..={nx}")));
            }
            let slot = if first == 'y' { nx + idx - 1 } else { idx - 1 };
            powers[slot] = powers[slot]
                .checked_add(exp)
                .ok_or_else(|| perr(line, "exponent overflow"))?;
            open = true;
        } else {
            let c: f64 = tok
                .parse()
                .map_err(|_| perr(line, format!("unexpected token `{tok}`")))?;
            if !c.is_finite() {
                return Err(perr(line, format!("non-finite coefficient `{tok}`")));
            }
            if open && (coeff.is_some() || powers.iter().any(|&p| p > 0)) {
                flush(&mut sign, &mut coeff, &mut powers, &mut open, &mut poly);
            }
            coeff = Some(coeff.unwrap_or(1.0) * c);
            open = true;
        }
    }
    if !open && sign < 0.0 {
        return Err(perr(line, "dangling sign"));
    }
    flush(&mut sign, &mut coeff, &mut powers, &mut open, &mut poly);
    Ok(poly)
}

fn write_poly<T: Real>(p: &Polynomial<T>, nx: usize) -> String {
    let mut s = String::new();
    for (i, m) in p.terms.iter().enumerate() {
        let c = m.coeff.as_f64();
        if i > 0 {
            s.push_str(if c < 0.0 { " - " } else { " + " });
        } else if c < 0.0 {
            s.push_str("- ");
        }
        s.push_str(&format!("{}", c.abs()));
        for (k, &pw) in m.powers.iter().enumerate() {
            if pw == 0 {
                continue;
            }
            let (v, idx) = if k < nx { ('x', k + 1) } else { ('y', k - nx + 1) };
            if pw == 1 {
                s.push_str(&format!(" {v}{idx}"));
            } else {
                s.push_str(&format!(" {v}{idx}^{pw}"));
            }
        }
    }
    s
}

fn parse_index(tok: Option<&str>, n: usize, line: usize) -> Result<usize, GroupError> {
    let tok = tok.ok_or_else(|| perr(line, "missing index"))?;
    let k: usize = tok.parse().map_err(|_| perr(line, format!("bad index `{tok}`")))?;
    if k == 0 || k > n {
        return Err(perr(line, format!("index {k} out of range 1..={n}")));
    }
    Ok(k - 1)
}

impl<T: Real> GroupSpec<T> {
    pub fn from_text(src: &str) -> Result<Self, GroupError> {
        let mut name = None;
        let mut weights: Option<Vec<u32>> = None;
        let mut nu = None;
        let mut rho = QuasiTriangle {
            max: None,
            sum: None,
            smooth: None,
        };
        let mut law = Vec::new();
        let mut inv = Vec::new();
        let mut fields = Vec::new();

        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap().trim();
            if text.is_empty() {
                continue;
            }
            let (head, body) = text
                .split_once(':')
                .ok_or_else(|| perr(line, "expected `key: value`"))?;
            let mut head_words = head.split_whitespace();
            let key = head_words.next().unwrap_or("");
            let need_n = || {
                weights
                    .as_ref()
                    .map(Vec::len)
                    .ok_or_else(|| perr(line, "`weights:` must come before tables"))
            };
            match key {
                "name" => name = Some(body.trim().to_string()),
                "weights" => {
                    let w = body
                        .split_whitespace()
                        .map(|t| t.parse::<u32>().map_err(|_| perr(line, format!("bad weight `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    weights = Some(w);
                }
                "nu" => nu = Some(body.trim().parse::<u32>().map_err(|_| perr(line, "bad ν"))?),
                "rho" => {
                    for item in body.split_whitespace() {
                        let (k, v) = item
                            .split_once('=')
                            .ok_or_else(|| perr(line, format!("expected variant=value, got `{item}`")))?;
                        let v: f64 = v.parse().map_err(|_| perr(line, format!("bad ρ `{v}`")))?;
                        let variant: QuasiNorm = k.parse().map_err(|_| perr(line, format!("unknown variant `{k}`")))?;
                        match variant {
                            QuasiNorm::Max => rho.max = Some(v),
                            QuasiNorm::Sum => rho.sum = Some(v),
                            QuasiNorm::Smooth => rho.smooth = Some(v),
                        }
                    }
                }
                "law" => {
                    let n = need_n()?;
                    let k = parse_index(head_words.next(), n, line)?;
                    law.push((k, parse_poly::<T>(body, n, true, line)?));
                }
                "inv" => {
                    let n = need_n()?;
                    let k = parse_index(head_words.next(), n, line)?;
                    inv.push((k, parse_poly::<T>(body, n, false, line)?));
                }
                "field" => {
                    let n = need_n()?;
                    let j = parse_index(head_words.next(), n, line)?;
                    let k = parse_index(head_words.next(), n, line)?;
                    if k <= j {
                        return Err(perr(line, "only entries above the diagonal (k > j) are given"));
                    }
                    fields.push((j, k, parse_poly::<T>(body, n, false, line)?));
                }
                other => return Err(perr(line, format!("unknown key `{other}`"))),
            }
            if head_words.next().is_some() {
                return Err(perr(line, "too many indices"));
            }
        }

        let name = name.ok_or_else(|| perr(0, "missing `name:`"))?;
        let weights = weights.ok_or_else(|| perr(0, "missing `weights:`"))?;
        let n = weights.len();
        let mut law_t = vec![Polynomial::zero(2 * n); n];
        for (k, p) in law {
            law_t[k] = p;
        }
        let mut inv_t = vec![Polynomial::zero(n); n];
        for (k, p) in inv {
            inv_t[k] = p;
        }
        let mut field_t = vec![vec![Polynomial::zero(n); n]; n];
        for (j, k, p) in fields {
            field_t[j][k] = p;
        }
        let one = 1.0;
        let rho = QuasiTriangle {
            max: T::lit(rho.max.unwrap_or(one)),
            sum: T::lit(rho.sum.unwrap_or(one)),
            smooth: T::lit(rho.smooth.unwrap_or(one)),
        };
        GroupSpec::new(name, weights, nu.unwrap_or(2), law_t, inv_t, field_t, rho)
    }

    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut s = String::new();
        s.push_str(&format!("name: {}\n", self.name));
        let w: Vec<String> = self.weights.iter().map(u32::to_string).collect();
        s.push_str(&format!("weights: {}\n", w.join(" ")));
        s.push_str(&format!("nu: {}\n", self.nu));
        s.push_str(&format!(
            "rho: max={} sum={} smooth={}\n",
            self.rho.max.as_f64(),
            self.rho.sum.as_f64(),
            self.rho.smooth.as_f64()
        ));
        for (k, p) in self.law.iter().enumerate() {
            if !p.is_zero() {
                s.push_str(&format!("law {}: {}\n", k + 1, write_poly(p, n)));
            }
        }
        for (k, p) in self.inv.iter().enumerate() {
            if !p.is_zero() {
                s.push_str(&format!("inv {}: {}\n", k + 1, write_poly(p, n)));
            }
        }
        for (j, row) in self.fields.iter().enumerate() {
            for (k, p) in row.iter().enumerate().skip(j + 1) {
                if !p.is_zero() {
                    s.push_str(&format!("field {} {}: {}\n", j + 1, k + 1, write_poly(p, n)));
                }
            }
        }
        s
    }
}

impl<T: Real> FromStr for GroupSpec<T> {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_text(s)
    }
}

impl<T: Real> fmt::Display for GroupSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_text() {
        let g = GroupSpec::<f64>::heisenberg();
        let text = g.to_text();
        assert!(text.contains("law 3: 0.5 x1 y2 - 0.5 x2 y1"), "{text}");
        assert!(text.contains("field 1 3: - 0.5 x2"), "{text}");
        let back: GroupSpec<f64> = text.parse().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn hand_written_description() {
        let src = "\
# Heisenberg, written by hand
name: H1
weights: 1 1 2
nu: 2
rho: max=1 sum=1.34 smooth=1.001
law 3: 0.5 x1 y2 -0.5 x2 y1
field 1 3: -0.5 x2
field 2 3: 0.5 * x1   # trailing comment
";
        let g: GroupSpec<f64> = src.parse().unwrap();
        assert_eq!(g, GroupSpec::heisenberg());
    }

    #[test]
    fn euclidean_text_is_minimal() {
        let g = GroupSpec::<f64>::euclidean(3);
        assert_eq!(
            g.to_text(),
            "name: R3\nweights: 1 1 1\nnu: 2\nrho: max=1 sum=1 smooth=1\n"
        );
        assert_eq!(g.to_text().parse::<GroupSpec<f64>>().unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = GroupSpec::<f64>::from_text("name: G\nweights: 1 1 2\nlaw 3: x4 y1\n").unwrap_err();
        assert!(matches!(e, GroupError::Parse { line: 3, .. }), "{e}");
        let e = GroupSpec::<f64>::from_text("name: G\nlaw 1: x1\n").unwrap_err();
        assert!(matches!(e, GroupError::Parse { line: 2, .. }));
        let e = GroupSpec::<f64>::from_text("name: G\nweights: 1 1 2\ninv 1: y1\n").unwrap_err();
        assert!(matches!(e, GroupError::Parse { line: 3, .. }));
        // structurally invalid law: u-component of weight 1
        let e = GroupSpec::<f64>::from_text("name: G\nweights: 1 1 2\nlaw 3: x1\n").unwrap_err();
        assert!(matches!(e, GroupError::Invalid(_)));
    }
}
