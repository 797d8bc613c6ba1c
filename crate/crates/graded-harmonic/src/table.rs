//! CSV tables: comma separated, header row, LF line endings, numbers with
//! 17 significant digits.

use std::io::Write;

/// 17 significant digits in scientific notation (round-trips any f64).
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // normalize −0 so identical runs print identical bytes
        return format!("{:.16e}", 0.0f64);
    }
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "PASS" } else { "FAIL" }.to_string())
    }
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Num(x) => fmt_num(x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s,
        }
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row.into_iter().map(Cell::render).collect());
    }

    pub fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 cells")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-0.0), fmt_num(0.0));
        assert_eq!(fmt_num(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        let mut t = Table::new(&["name", "value", "n", "status"]);
        t.push(vec!["a,b".into(), 2.5.into(), 3usize.into(), true.into()]);
        assert_eq!(
            t.to_csv_string(),
            "name,value,n,status\n\"a,b\",2.5000000000000000e0,3,PASS\n"
        );
    }
}
