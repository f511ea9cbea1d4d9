//! Regeneration of the two reference digit-string tables.
//!
//! Layout: one header line naming the columns, then one line per row,
//! fields separated by a single space, row index first.

use serde::Serialize;

use crate::string_algebra::{add, complement, reverse, sub, DigitString, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: &'static str,
    pub ring: Ring,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    #[must_use]
    pub fn render(&self) -> String {
        let mut out = format!("i {}\n", self.columns.join(" "));
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{} {}\n", i + 1, row.join(" ")));
        }
        out
    }
}

fn advance(s: &DigitString) -> DigitString {
    let ring = s.ring();
    let digits = s.digits().iter().map(|&d| ring.reduce(i64::from(d) + 1)).collect();
    DigitString::new(digits, ring).expect("digits stay in range")
}

/// Ten rows from seed 1013412 under `Mod10`.
#[must_use]
pub fn table1() -> Table {
    let mut s = DigitString::parse("1013412", Ring::Mod10).expect("seed");
    let mut rows = Vec::new();
    for _ in 0..10 {
        let (r, c) = (reverse(&s), complement(&s));
        let cr = reverse(&c);
        rows.push(vec![
            s.to_string(),
            r.to_string(),
            c.to_string(),
            cr.to_string(),
            add(&s, &r).expect("same shape").to_string(),
            sub(&s, &r).expect("same shape").to_string(),
            add(&c, &cr).expect("same shape").to_string(),
        ]);
        s = advance(&s);
    }
    Table {
        name: "table1",
        ring: Ring::Mod10,
        columns: vec!["s", "s^-1", "~s", "~s^-1", "s[+]s^-1", "s[-]s^-1", "~s[+]~s^-1"],
        rows,
        notes: vec![
            "erratum: the defining text says mod 9, but every tabulated column (including s[-]s^-1, where 1-2 gives 9) follows mod 10"
                .to_string(),
        ],
    }
}

/// Nine rows from seed 142857 under the lazy `Mod9` ring. Operation columns
/// are shown with 9 standing for a zero residue.
#[must_use]
pub fn table2() -> Table {
    let mut d = DigitString::parse("142857", Ring::Mod9).expect("seed");
    let mut rows = Vec::new();
    for _ in 0..9 {
        let (r, c) = (reverse(&d), complement(&d));
        let cr = reverse(&c);
        let ops = [add(&d, &r), add(&c, &cr), sub(&d, &c), sub(&d, &cr), sub(&r, &cr)];
        let mut row = vec![d.to_string(), r.to_string(), c.to_string(), cr.to_string()];
        row.extend(ops.into_iter().map(|x| x.expect("same shape").display_nine_for_zero()));
        rows.push(row);
        d = advance(&d);
    }
    Table {
        name: "table2",
        ring: Ring::Mod9,
        columns: vec!["d", "d^-1", "~d", "~d^-1", "d[+]d^-1", "~d[+]~d^-1", "d[-]~d", "d[-]~d^-1", "d^-1[-]~d^-1"],
        rows,
        notes: vec![
            "printed row 6 of d[-]~d^-1 reads 921129; the digit-wise value is 912219 (equal to d[+]d^-1 as the table's own identity requires)".to_string(),
            "printed row 9 of d[-]~d reads 962853; the digit-wise value is 962583 (two digits transposed)".to_string(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let t1 = table1();
        assert_eq!(t1.rows.len(), 10);
        assert!(t1.rows.iter().all(|r| r.len() == 7));
        let t2 = table2();
        assert_eq!(t2.rows.len(), 9);
        assert!(t2.rows.iter().all(|r| r.len() == 9));
        assert!(t2.render().starts_with("i d d^-1"));
    }

    #[test]
    fn tenth_row_wraps() {
        assert_eq!(table1().rows[9][0], "0902301");
        assert_eq!(table2().rows[8][0], "931746");
    }
}
