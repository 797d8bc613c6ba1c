//! Field files. Byte layouts are documented in `docs/formats.md`.
//!
//! CSV: a `# group=<name> grid=<spec> margin=<m>` line, a header row
//! `x1,…,xn,value`, then one row per node in flat order.
//! Binary: `GHF1`, u32 LE header length, the same header text without `# `,
//! u64 LE value count, then f64 LE values in flat order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{FieldError, Grid, SampledField};
use crate::group::GroupSpec;
use crate::scalar::Real;
use crate::table::fmt_num;

pub const MAGIC: &[u8; 4] = b"GHF1";

fn header<T: Real>(f: &SampledField<T>) -> String {
    format!(
        "group={} grid={} margin={}",
        f.group().name(),
        f.grid().spec(),
        f.margin()
    )
}

struct Header<T> {
    group: String,
    grid: Grid<T>,
    margin: usize,
}

fn parse_header<T: Real>(text: &str) -> Result<Header<T>, FieldError> {
    let mut group = None;
    let mut grid = None;
    let mut margin = None;
    for item in text.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| FieldError::Format(format!("bad header item `{item}`")))?;
        match k {
            "group" => group = Some(v.to_string()),
            "grid" => grid = Some(Grid::parse_spec(v)?),
            "margin" => margin = Some(v.parse().map_err(|_| FieldError::Format(format!("bad margin `{v}`")))?),
            other => return Err(FieldError::Format(format!("unknown header key `{other}`"))),
        }
    }
    Ok(Header {
        group: group.ok_or_else(|| FieldError::Format("header lacks group=".into()))?,
        grid: grid.ok_or_else(|| FieldError::Format("header lacks grid=".into()))?,
        margin: margin.unwrap_or(0),
    })
}

fn resolve<T: Real>(name: &str, group: Option<Arc<GroupSpec<T>>>) -> Result<Arc<GroupSpec<T>>, FieldError> {
    match group {
        Some(g) if g.name() == name => Ok(g),
        Some(g) => Err(FieldError::Format(format!(
            "file is on group `{name}`, expected `{}`",
            g.name()
        ))),
        None => GroupSpec::builtin(name)
            .map(Arc::new)
            .ok_or_else(|| FieldError::Format(format!("unknown group `{name}`; pass its description"))),
    }
}

pub fn write_csv<T: Real, W: Write>(f: &SampledField<T>, w: W) -> Result<(), FieldError> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# {}", header(f))?;
    let n = f.grid().dim();
    let cols: Vec<String> = (1..=n).map(|k| format!("x{k}")).chain(["value".to_string()]).collect();
    writeln!(w, "{}", cols.join(","))?;
    let mut x = vec![T::zero(); n];
    for (i, v) in f.values().iter().enumerate() {
        f.grid().coords_of(i, &mut x);
        for c in &x {
            write!(w, "{},", fmt_num(c.as_f64()))?;
        }
        writeln!(w, "{}", fmt_num(v.as_f64()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: Real, R: Read>(r: R, group: Option<Arc<GroupSpec<T>>>) -> Result<SampledField<T>, FieldError> {
    let mut r = BufReader::new(r);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let text = first
        .trim_end()
        .strip_prefix('#')
        .ok_or_else(|| FieldError::Format("CSV field file must start with a `#` header line".into()))?;
    let h: Header<T> = parse_header(text)?;
    let group = resolve(&h.group, group)?;
    let n = h.grid.dim();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let mut values = Vec::with_capacity(h.grid.len());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FieldError::Format(e.to_string()))?;
        if rec.len() != n + 1 {
            return Err(FieldError::Format(format!(
                "row {} has {} columns, want {}",
                values.len() + 1,
                rec.len(),
                n + 1
            )));
        }
        let v: f64 = rec[n]
            .trim()
            .parse()
            .map_err(|_| FieldError::Format(format!("bad value `{}`", &rec[n])))?;
        values.push(T::lit(v));
    }
    SampledField::new(group, h.grid, values, h.margin)
}

pub fn write_binary<T: Real, W: Write>(f: &SampledField<T>, w: W) -> Result<(), FieldError> {
    let mut w = BufWriter::new(w);
    let h = header(f);
    w.write_all(MAGIC)?;
    w.write_all(&(h.len() as u32).to_le_bytes())?;
    w.write_all(h.as_bytes())?;
    w.write_all(&(f.values().len() as u64).to_le_bytes())?;
    for v in f.values() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(r: R, group: Option<Arc<GroupSpec<T>>>) -> Result<SampledField<T>, FieldError> {
    let mut r = BufReader::new(r);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FieldError::Format("not a GHF1 field file".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let mut text = vec![0u8; u32::from_le_bytes(b4) as usize];
    r.read_exact(&mut text)?;
    let text = String::from_utf8(text).map_err(|_| FieldError::Format("header is not UTF-8".into()))?;
    let h: Header<T> = parse_header(&text)?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    if count != h.grid.len() {
        return Err(FieldError::LengthMismatch {
            expected: h.grid.len(),
            got: count,
        });
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        values.push(T::lit(f64::from_le_bytes(b8)));
    }
    let group = resolve(&h.group, group)?;
    SampledField::new(group, h.grid, values, h.margin)
}

/// Writes CSV for `.csv` paths and binary otherwise.
pub fn save<T: Real>(f: &SampledField<T>, path: &Path) -> Result<(), FieldError> {
    let file = File::create(path)?;
    if is_csv(path) {
        write_csv(f, file)
    } else {
        write_binary(f, file)
    }
}

pub fn load<T: Real>(path: &Path, group: Option<Arc<GroupSpec<T>>>) -> Result<SampledField<T>, FieldError> {
    let file = File::open(path)?;
    if is_csv(path) {
        read_csv(file, group)
    } else {
        read_binary(file, group)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_field() -> SampledField<f64> {
        let g = Arc::new(GroupSpec::heisenberg());
        let grid = Grid::cube(3, 0.25, 10).unwrap();
        SampledField::from_fn(g, grid, 2, |x| {
            let r2 = x.iter().map(|c| c * c).sum::<f64>();
            if r2 < 0.5 {
                (0.1 + x[0]) / 3.0 * (1.0 - 2.0 * r2)
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let f = sample_field();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(
            text.starts_with("# group=H1 grid=-1.25:0.25:10,-1.25:0.25:10,-1.25:0.25:10 margin=2\nx1,x2,x3,value\n")
        );
        assert!(!text.contains('\r'));
        let back = read_csv(&buf[..], None).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.margin(), 2);
    }

    #[test]
    fn binary_roundtrip_and_layout() {
        let f = sample_field();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GHF1");
        let hl = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        assert_eq!(buf.len(), 8 + hl + 8 + 8 * 1000);
        let back: SampledField<f64> = read_binary(&buf[..], None).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_binary::<f64, _>(&b"NOPE"[..], None).is_err());
        assert!(read_csv::<f64, _>(&b"x1,value\n0,1\n"[..], None).is_err());
        let other = Arc::new(GroupSpec::<f64>::euclidean(3));
        let mut buf = Vec::new();
        write_binary(&sample_field(), &mut buf).unwrap();
        assert!(read_binary(&buf[..], Some(other)).is_err());
    }
}
