//! Convergence tables and their CSV form.

use std::fmt::Write;

use nnfd::convergence::{estimate_order, format_e16};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: usize,
    pub h: f64,
    /// One max-norm error per quantity.
    pub errors: Vec<f64>,
    /// Order from the previous row; `None` on the first row.
    pub orders: Vec<Option<f64>>,
    pub train_loss: f64,
    pub train_epochs: usize,
    pub converged: bool,
    pub train_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub quantities: Vec<String>,
    pub rows: Vec<Row>,
}

impl ConvergenceTable {
    pub fn new(quantities: &[&str]) -> Self {
        ConvergenceTable { quantities: quantities.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    /// Appends a row; orders against the previous row are filled in here.
    pub fn push(&mut self, mut row: Row) {
        assert_eq!(row.errors.len(), self.quantities.len());
        row.orders = match self.rows.last() {
            None => vec![None; row.errors.len()],
            Some(prev) => prev
                .errors
                .iter()
                .zip(&row.errors)
                .map(|(&a, &b)| estimate_order(&[a, b], &[prev.h, row.h]).ok().map(|o| o[0]))
                .collect(),
        };
        self.rows.push(row);
    }

    /// Orders of quantity `q` between adjacent rows.
    pub fn orders(&self, q: usize) -> Vec<Option<f64>> {
        self.rows.iter().skip(1).map(|r| r.orders[q]).collect()
    }

    pub fn errors(&self, q: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.errors[q]).collect()
    }

    /// Deterministic table: everything except wall times.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h");
        for q in &self.quantities {
            write!(s, ",err_{q}").unwrap();
        }
        for q in &self.quantities {
            write!(s, ",order_{q}").unwrap();
        }
        s.push_str(",train_loss,train_epochs,converged\n");
        for r in &self.rows {
            write!(s, "{},{}", r.n, format_e16(r.h)).unwrap();
            for e in &r.errors {
                write!(s, ",{}", format_e16(*e)).unwrap();
            }
            for o in &r.orders {
                s.push(',');
                if let Some(o) = o {
                    s.push_str(&format_e16(*o));
                }
            }
            writeln!(s, ",{},{},{}", format_e16(r.train_loss), r.train_epochs, r.converged).unwrap();
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("n,train_seconds,solve_seconds\n");
        for r in &self.rows {
            writeln!(s, "{},{},{}", r.n, format_e16(r.train_seconds), format_e16(r.solve_seconds)).unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, e: f64) -> Row {
        Row {
            n,
            h: 2.0 / n as f64,
            errors: vec![e, 2.0 * e],
            orders: vec![],
            train_loss: 1e-13,
            train_epochs: 10,
            converged: true,
            train_seconds: 0.5,
            solve_seconds: 0.25,
        }
    }

    #[test]
    fn orders_between_adjacent_rows() {
        let mut t = ConvergenceTable::new(&["u", "grad"]);
        t.push(row(64, 4e-3));
        t.push(row(128, 1e-3));
        t.push(row(256, 1e-3));
        assert_eq!(t.rows[0].orders, vec![None, None]);
        assert!((t.orders(0)[0].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(t.orders(1)[1], Some(0.0));
    }

    #[test]
    fn csv_layout() {
        let mut t = ConvergenceTable::new(&["u"]);
        t.push(Row { errors: vec![0.5], ..row(2, 0.0) });
        t.push(Row { errors: vec![0.125], ..row(4, 0.0) });
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,h,err_u,order_u,train_loss,train_epochs,converged");
        assert_eq!(lines[1], "2,1.0000000000000000e+00,5.0000000000000000e-01,,1.0000000000000000e-13,10,true");
        assert_eq!(lines[2], "4,5.0000000000000000e-01,1.2500000000000000e-01,2.0000000000000000e+00,1.0000000000000000e-13,10,true");
        assert!(t.timings_csv().starts_with("n,train_seconds,solve_seconds\n2,5.0000000000000000e-01,"));
    }
}
