//! CSV tables for coefficient sequences, product-sphere coefficients and
//! simulated fields.
//!
//! Numbers carry 17 significant digits. Metadata and footers are `#` lines;
//! group elements are JSON inside the quoted `u` column.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupModel};
use crate::pd_check::{Configuration, GaussianSamples};
use crate::schoenberg::{Coefficient, Dimension, NumericProfile, ProductSphereCoefficients, SchoenbergSequence};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn element_json(u: &GroupElement) -> String {
    serde_json::to_string(u).expect("element serializes")
}

/// Writes `phi_{n,d}(u)` for every degree and every `u` in `grid`.
pub fn write_sequence(seq: &SchoenbergSequence, model: &GroupModel, grid: &[GroupElement]) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "#d={}", seq.d).unwrap();
    writeln!(out, "#group={}", serde_json::to_string(model).expect("model serializes")).unwrap();
    out.push_str("n,u,re,im\n");
    for (n, c) in seq.coefficients.iter().enumerate() {
        for u in grid {
            let v = c.eval(model, u)?;
            let quoted = element_json(u).replace('"', "\"\"");
            writeln!(out, "{n},\"{quoted}\",{},{}", fmt_f64(v.re), fmt_f64(v.im)).unwrap();
        }
    }
    let identity: Vec<String> = seq.identity_values(model).iter().map(|v| fmt_f64(v.re)).collect();
    writeln!(out, "#identity_values,{}", identity.join(",")).unwrap();
    writeln!(out, "#tail_mass,{}", fmt_f64(seq.tail_mass_at_identity(model))).unwrap();
    if let Some(b) = seq.tail_bound {
        writeln!(out, "#tail_bound,{}", fmt_f64(b)).unwrap();
    }
    for diag in &seq.diagnostics {
        let tag = if diag.certifies_nonmembership() { "nonmember" } else { "warning" };
        let kind = serde_json::to_value(diag.kind).expect("kind serializes");
        writeln!(
            out,
            "#DIAGNOSTIC:{tag},degree={},kind={},value={}",
            diag.degree,
            kind.as_str().unwrap_or_default(),
            fmt_f64(diag.value)
        )
        .unwrap();
    }
    Ok(out)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("invalid {what}: {s:?}")))
}

/// Reads a table written by [`write_sequence`].
pub fn read_sequence(text: &str) -> Result<(SchoenbergSequence, GroupModel)> {
    let mut d = None;
    let mut model = None;
    let mut tail_bound = None;
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        if let Some(v) = line.strip_prefix("d=") {
            d = Some(v.parse::<Dimension>()?);
        } else if let Some(v) = line.strip_prefix("group=") {
            let m: GroupModel = serde_json::from_str(v).map_err(|e| Error::Parse(format!("invalid group: {e}")))?;
            m.validate("group")?;
            model = Some(m);
        } else if let Some(v) = line.strip_prefix("tail_bound,") {
            tail_bound = Some(parse_f64(v, "tail bound")?);
        }
    }
    let d = d.ok_or_else(|| Error::Parse("missing #d= line".into()))?;
    let model = model.ok_or_else(|| Error::Parse("missing #group= line".into()))?;

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<(GroupElement, Complex64)>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("bad CSV row: {e}")))?;
        if record.len() != 4 {
            return Err(Error::Parse(format!("expected 4 columns, found {}", record.len())));
        }
        let n: usize = record[0].trim().parse().map_err(|_| Error::Parse(format!("invalid degree {:?}", &record[0])))?;
        let u = model.parse_element(&record[1])?;
        let v = Complex64::new(parse_f64(&record[2], "re")?, parse_f64(&record[3], "im")?);
        if rows.len() <= n {
            rows.resize(n + 1, Vec::new());
        }
        rows[n].push((u, v));
    }
    if rows.is_empty() {
        return Err(Error::Parse("table has no rows".into()));
    }
    let coefficients = rows
        .into_iter()
        .enumerate()
        .map(|(n, row)| {
            if row.is_empty() {
                return Err(Error::Parse(format!("degree {n} has no rows")));
            }
            let (grid, values) = row.into_iter().unzip();
            Ok(Coefficient::Sampled { profile: NumericProfile::new(&model, grid, values)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seq = SchoenbergSequence::new(d, coefficients);
    seq.tail_bound = tail_bound;
    seq.diagnose(&model);
    Ok((seq, model))
}

/// The grid shared by the coefficients of a sequence read from a table.
pub fn sequence_grid(seq: &SchoenbergSequence) -> Option<Vec<GroupElement>> {
    seq.coefficients.iter().find_map(|c| match c {
        Coefficient::Sampled { profile } => Some(profile.grid.clone()),
        Coefficient::Parametric { .. } => None,
    })
}

pub fn write_product(coeffs: &ProductSphereCoefficients) -> String {
    let mut out = String::new();
    writeln!(out, "#d={}", coeffs.d).unwrap();
    writeln!(out, "#d_prime={}", coeffs.d_prime).unwrap();
    out.push_str("n,m,value\n");
    for (n, row) in coeffs.coefficients.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            writeln!(out, "{n},{m},{}", fmt_f64(*v)).unwrap();
        }
    }
    writeln!(out, "#total_mass,{}", fmt_f64(coeffs.total_mass)).unwrap();
    for &(n, m, v) in &coeffs.negative_entries {
        let tag = if v < -crate::schoenberg::NONMEMBER_TOL { "nonmember" } else { "warning" };
        writeln!(out, "#DIAGNOSTIC:{tag},n={n},m={m},value={}", fmt_f64(v)).unwrap();
    }
    out
}

/// Reads a table written by [`write_product`].
pub fn read_product(text: &str) -> Result<ProductSphereCoefficients> {
    let mut d = None;
    let mut d_prime = None;
    for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
        if let Some(v) = line.strip_prefix("d=") {
            d = Some(v.parse::<Dimension>()?);
        } else if let Some(v) = line.strip_prefix("d_prime=") {
            d_prime = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse(format!("invalid d_prime {v:?}")))?);
        }
    }
    let (d, d_prime) = d.zip(d_prime).ok_or_else(|| Error::Parse("missing #d= or #d_prime= line".into()))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut table: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("bad CSV row: {e}")))?;
        let idx = |i: usize| -> Result<usize> {
            record.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse("invalid index".into()))
        };
        let (n, m) = (idx(0)?, idx(1)?);
        let v = parse_f64(record.get(2).unwrap_or_default(), "value")?;
        if table.len() <= n {
            table.resize(n + 1, Vec::new());
        }
        if table[n].len() <= m {
            table[n].resize(m + 1, 0.0);
        }
        table[n][m] = v;
    }
    Ok(ProductSphereCoefficients::new(d, d_prime, table))
}

pub fn write_samples(config: &Configuration, samples: &GaussianSamples) -> String {
    let mut out = String::new();
    writeln!(out, "#configuration={}", serde_json::to_string(config).expect("configuration serializes")).unwrap();
    writeln!(out, "#jitter,{}", fmt_f64(samples.jitter)).unwrap();
    let header: Vec<String> = (0..samples.samples.ncols()).map(|k| format!("p{k}")).collect();
    writeln!(out, "sample,{}", header.join(",")).unwrap();
    for (i, row) in samples.samples.row_iter().enumerate() {
        let values: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{i},{}", values.join(",")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::PdFunction;

    #[test]
    fn sequence_round_trip() {
        let model = GroupModel::RealVector { k: 2 };
        let grid = vec![
            GroupElement::Vector(vec![0.0, 0.0]),
            GroupElement::Vector(vec![0.5, -1.0]),
            GroupElement::Vector(vec![1.0, 1.0]),
        ];
        let mut seq = SchoenbergSequence::new(
            Dimension::Finite(3),
            vec![
                Coefficient::from_pd(PdFunction::Gaussian { a: 0.3 }),
                Coefficient::from_pd(PdFunction::Cosine { omega: crate::groups::Frequency(vec![1.0, 2.0]) }).scaled(0.25),
            ],
        );
        seq.tail_bound = Some(0.0);
        let text = write_sequence(&seq, &model, &grid).unwrap();
        let (back, back_model) = read_sequence(&text).unwrap();
        assert_eq!(back_model, model);
        assert_eq!(back.d, Dimension::Finite(3));
        assert_eq!(back.tail_bound, Some(0.0));
        for u in &grid {
            for n in 0..2 {
                assert_eq!(back.coefficients[n].eval(&model, u).unwrap(), seq.coefficients[n].eval(&model, u).unwrap());
            }
        }
        assert_eq!(write_sequence(&back, &model, &grid).unwrap(), text);
    }

    #[test]
    fn nonmember_footer() {
        let model = GroupModel::Integers;
        let mut seq = SchoenbergSequence::new(
            Dimension::Finite(3),
            vec![Coefficient::from_pd(PdFunction::Constant { r: 1.0 }).scaled(-0.5)],
        );
        seq.diagnose(&model);
        let text = write_sequence(&seq, &model, &[GroupElement::Integer(0)]).unwrap();
        assert!(text.contains("#DIAGNOSTIC:nonmember,degree=0"), "{text}");
    }

    #[test]
    fn product_round_trip() {
        let c = ProductSphereCoefficients::new(Dimension::Infinity, 2, vec![vec![0.5, 0.0], vec![0.25, -0.1]]);
        let text = write_product(&c);
        assert!(text.contains("#DIAGNOSTIC:nonmember,n=1,m=1"));
        assert_eq!(read_product(&text).unwrap(), c);
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
