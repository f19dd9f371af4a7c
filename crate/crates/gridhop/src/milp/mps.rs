//! MPS writer for handing instances to third-party solvers as a
//! debugging aid.
//!
//! Emits free-format MPS with an `OBJSENSE MAX` section, integer
//! markers around the binary columns, and the objective constant as a
//! negated RHS entry on the objective row (the convention CPLEX and
//! Gurobi read back). Row and column names come straight from the
//! instance, so they match the builder's step-indexed names.

use std::io::{self, Write};

use crate::milp::instance::{MilpInstance, RelOp};

fn fmt_num(v: f64) -> String {
    // Shortest round-trip formatting keeps files diffable.
    format!("{v}")
}

/// Write `instance` as an MPS document.
pub fn write_mps(instance: &MilpInstance, w: &mut dyn Write) -> io::Result<()> {
    instance
        .check_shape()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;

    writeln!(w, "NAME          {}", instance.name)?;
    writeln!(w, "OBJSENSE")?;
    writeln!(w, "    MAX")?;

    writeln!(w, "ROWS")?;
    writeln!(w, " N  OBJ")?;
    for row in &instance.rows {
        let tag = match row.rel {
            RelOp::Le => "L",
            RelOp::Eq => "E",
            RelOp::Ge => "G",
        };
        writeln!(w, " {}  {}", tag, row.name)?;
    }

    // Column-major entries: objective first, then every row the column
    // appears in.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.n_cols()];
    for (i, row) in instance.rows.iter().enumerate() {
        for &(j, a) in &row.terms {
            by_col[j].push((i, a));
        }
    }

    writeln!(w, "COLUMNS")?;
    let mut in_integer_block = false;
    let mut marker = 0usize;
    for (j, col) in instance.columns.iter().enumerate() {
        if col.integral != in_integer_block {
            let kind = if col.integral { "'INTORG'" } else { "'INTEND'" };
            writeln!(w, "    M{marker:06}  'MARKER'                 {kind}")?;
            marker += 1;
            in_integer_block = col.integral;
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        if instance.objective[j] != 0.0 {
            entries.push(("OBJ".to_owned(), instance.objective[j]));
        }
        for &(i, a) in &by_col[j] {
            entries.push((instance.rows[i].name.clone(), a));
        }
        if entries.is_empty() {
            // Keep the column present even if it touches nothing.
            entries.push(("OBJ".to_owned(), 0.0));
        }
        for pair in entries.chunks(2) {
            write!(w, "    {:<10}", col.name)?;
            for (row_name, a) in pair {
                write!(w, "{:<10}{:<16}", row_name, fmt_num(*a))?;
            }
            writeln!(w)?;
        }
    }
    if in_integer_block {
        writeln!(w, "    M{marker:06}  'MARKER'                 'INTEND'")?;
    }

    writeln!(w, "RHS")?;
    if instance.objective_constant != 0.0 {
        writeln!(
            w,
            "    RHS       {:<10}{:<16}",
            "OBJ",
            fmt_num(-instance.objective_constant)
        )?;
    }
    for row in &instance.rows {
        if row.rhs != 0.0 {
            writeln!(w, "    RHS       {:<10}{:<16}", row.name, fmt_num(row.rhs))?;
        }
    }

    writeln!(w, "BOUNDS")?;
    for col in &instance.columns {
        let (lo, up) = (col.lower, col.upper);
        if lo == up {
            writeln!(w, " FX BND       {:<10}{:<16}", col.name, fmt_num(lo))?;
            continue;
        }
        if col.integral && lo == 0.0 && up == 1.0 {
            writeln!(w, " BV BND       {:<10}", col.name)?;
            continue;
        }
        if lo.is_infinite() {
            writeln!(w, " MI BND       {:<10}", col.name)?;
        } else if lo != 0.0 {
            writeln!(w, " LO BND       {:<10}{:<16}", col.name, fmt_num(lo))?;
        }
        if up.is_finite() {
            writeln!(w, " UP BND       {:<10}{:<16}", col.name, fmt_num(up))?;
        }
    }

    writeln!(w, "ENDATA")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{BoundaryState, NodeSide, PriceSeries, SystemSpec};
    use crate::milp::build::{build_day_instance, FormulationOptions};
    use crate::milp::instance::{Column, MilpInstance};

    #[test]
    fn tiny_instance_layout() {
        let mut inst = MilpInstance::new("tiny");
        let x = inst.add_column(Column::continuous("X", 0.0, 4.0), 3.0);
        let y = inst.add_column(Column::binary("Y", 0), -2.0);
        inst.add_row("R1", vec![(x, 1.0), (y, 5.0)], RelOp::Le, 6.5);
        inst.objective_constant = -1.25;

        let mut buf = Vec::new();
        write_mps(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let expected = "NAME          tiny\n\
                        OBJSENSE\n    MAX\n\
                        ROWS\n N  OBJ\n L  R1\n\
                        COLUMNS\n\
                        \x20   X         OBJ       3               R1        1               \n\
                        \x20   M000000  'MARKER'                 'INTORG'\n\
                        \x20   Y         OBJ       -2              R1        5               \n\
                        \x20   M000001  'MARKER'                 'INTEND'\n\
                        RHS\n\
                        \x20   RHS       OBJ       1.25            \n\
                        \x20   RHS       R1        6.5             \n\
                        BOUNDS\n\
                        \x20UP BND       X         4               \n\
                        \x20BV BND       Y         \n\
                        ENDATA\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn day_instance_exports_cleanly() {
        let spec = SystemSpec {
            horizon: crate::core::HorizonConfig {
                step_hours: 0.25,
                steps_per_day: 4,
                day_index: 0,
            },
            ..SystemSpec::default()
        };
        let prices = PriceSeries::flat(35.0, 4);
        let boundary = BoundaryState::at_node(NodeSide::A, 1.0, 1);
        let day =
            build_day_instance(&spec, &prices, &boundary, &FormulationOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_mps(&day.milp, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("NAME"));
        assert!(text.contains("OBJSENSE"));
        assert!(text.contains("PD_A_001"));
        assert!(text.contains("EB_004"));
        assert!(text.ends_with("ENDATA\n"));
        // Every row name shows up in the ROWS section.
        for row in &day.milp.rows {
            assert!(text.contains(&row.name));
        }
    }
}
