//! Text, table and CSV renderings of reports and grids.

use std::fmt::Write;

use exemplar_core::{GridDocument, PlausibilityReport};

fn pad_table(rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..rows.first().map_or(0, Vec::len))
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    out
}

/// `type  initial  final` per type, in declaration order.
pub fn sizes_table(report: &PlausibilityReport) -> String {
    let mut rows = vec![vec!["type".to_string(), "initial".into(), "final".into()]];
    for f in &report.types {
        rows.push(vec![f.type_name.clone(), f.initial.to_string(), f.final_size.to_string()]);
    }
    pad_table(&rows)
}

pub fn check_text(report: &PlausibilityReport) -> String {
    let mut out = String::new();
    for f in report.types.iter().filter(|f| f.verdict != exemplar_core::Verdict::Ok) {
        writeln!(out, "{}: {} (initial {}, final {})", f.type_name, f.verdict, f.initial, f.final_size).unwrap();
    }
    if !report.suspects.is_empty() {
        writeln!(out, "examine: {}", report.suspects.join(", ")).unwrap();
    }
    writeln!(out, "verdict: {}", report.worst()).unwrap();
    out
}

/// One padded table per umbrella; nil cells print as `-`.
pub fn grid_table(doc: &GridDocument) -> String {
    let mut out = String::new();
    for (i, u) in doc.umbrellas.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "umbrella {}", u.root).unwrap();
        let mut rows = vec![u.columns.iter().map(|c| c.type_name.clone()).collect::<Vec<_>>()];
        rows.push(rows[0].iter().map(|h| "-".repeat(h.chars().count())).collect());
        for r in &u.rows {
            rows.push(r.cells.iter().map(|c| c.text.clone().unwrap_or_else(|| "-".into())).collect());
        }
        out += &pad_table(&rows);
    }
    out
}

/// CSV with an `umbrella` column; each umbrella opens with its own header
/// record naming the column types. Nil cells are empty.
pub fn grid_csv(doc: &GridDocument) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for u in &doc.umbrellas {
        let mut header = vec!["umbrella".to_string()];
        header.extend(u.columns.iter().map(|c| c.type_name.clone()));
        w.write_record(&header)?;
        for r in &u.rows {
            let mut rec = vec![u.root.clone()];
            rec.extend(r.cells.iter().map(|c| c.text.clone().unwrap_or_default()));
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use exemplar_core::dsl::parse_tree_spec;
    use exemplar_core::{fixtures, plausibility_report, GenConfig, ValueProvider};

    fn shop_grid() -> GridDocument {
        let s = fixtures::shop();
        let t = parse_tree_spec(fixtures::SHOP_TREE, &s).unwrap();
        GridDocument::build(&s, &t, &GenConfig::default(), &ValueProvider::from_schema(&s)).unwrap()
    }

    #[test]
    fn sizes_rows() {
        let table = sizes_table(&plausibility_report(&fixtures::shop(), &GenConfig::default()));
        let order = table.lines().find(|l| l.starts_with("Order ")).unwrap();
        assert_eq!(order.split_whitespace().collect::<Vec<_>>(), ["Order", "6", "4"]);
    }

    #[test]
    fn table_and_csv_agree_on_rows() {
        let g = shop_grid();
        let table = grid_table(&g);
        assert!(table.starts_with("umbrella n0\nCustomer  Order\n--------  -----\nAnn       OrderNr1\n"));
        assert!(table.contains("\nDi        -\n"));
        let csv = grid_csv(&g).unwrap();
        let records: Vec<_> = csv.lines().collect();
        assert_eq!(records[0], "umbrella,Customer,Order");
        assert_eq!(records.len() - g.umbrellas.len(), g.row_count());
        assert_eq!(records[5], "n0,Di,");
    }
}
