//! Per-step diagnostic ledger.

use std::io::Write;

use serde::Serialize;

use crate::solver::Integrands;

pub const LEDGER_HEADER: &str =
    "t,l2_C,h1_semi_C,h2_semi_C,l2_u,h1_semi_u,fq_u,dCdt_l2,mass,min_C,res_C,res_u,blowup";

/// One accepted step. Norm columns hold squared norms.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub l2_c: f64,
    pub h1_semi_c: f64,
    pub h2_semi_c: f64,
    pub l2_u: f64,
    pub h1_semi_u: f64,
    /// `(F(C) u, u)`; `None` when `F` is negative somewhere.
    pub fq_u: Option<f64>,
    pub dcdt_l2: f64,
    pub mass: f64,
    /// Minimum of `C` over the quadrature nodes.
    pub min_c: f64,
    /// Transport energy identity residual over the last step.
    pub res_c: f64,
    /// Momentum energy identity residual over the last step.
    pub res_u: f64,
    pub blowup: bool,
    /// `‖C − C̄‖²`.
    pub fluct_l2_c: f64,
    /// `‖f‖²`.
    pub f_l2: f64,
    /// `‖C(1 − C)‖²`.
    pub reaction_l2: f64,
    /// `‖F(C)‖_{H¹}`.
    pub mobility_h1: f64,
    /// `δ̂ ‖∇C ⊗ ∇C‖`.
    pub korteweg_bound: f64,
    /// Time integrals of the ledger integrands from `t = 0`.
    #[serde(skip)]
    pub integrals: Integrands,
    /// Magnitudes the residuals are measured against.
    pub scale_c: f64,
    pub scale_u: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn push(&mut self, row: LedgerRow) {
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{LEDGER_HEADER}")?;
        for r in &self.rows {
            write_row(&mut w, r)?;
        }
        Ok(())
    }
}

pub fn write_row<W: Write>(w: &mut W, r: &LedgerRow) -> std::io::Result<()> {
    let fq = r.fq_u.unwrap_or(f64::NAN);
    writeln!(
        w,
        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
        r.t,
        r.l2_c,
        r.h1_semi_c,
        r.h2_semi_c,
        r.l2_u,
        r.h1_semi_u,
        fq,
        r.dcdt_l2,
        r.mass,
        r.min_c,
        r.res_c,
        r.res_u,
        u8::from(r.blowup)
    )
}

/// Parses a ledger written by [`EnergyLedger::write_csv`]; extra columns
/// are not stored in the file and come back as zero.
pub fn read_csv(text: &str) -> Result<Vec<LedgerRow>, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(LEDGER_HEADER) {
        return Err("missing ledger header".into());
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 13 {
            return Err(format!("row {}: expected 13 columns, found {}", n + 1, cols.len()));
        }
        let v: Vec<f64> = cols[..12]
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", n + 1)))
            .collect::<Result<_, _>>()?;
        let blowup = match cols[12].trim() {
            "0" => false,
            "1" => true,
            other => return Err(format!("row {}: blowup flag {other:?}", n + 1)),
        };
        rows.push(LedgerRow {
            t: v[0],
            l2_c: v[1],
            h1_semi_c: v[2],
            h2_semi_c: v[3],
            l2_u: v[4],
            h1_semi_u: v[5],
            fq_u: (!v[6].is_nan()).then_some(v[6]),
            dcdt_l2: v[7],
            mass: v[8],
            min_c: v[9],
            res_c: v[10],
            res_u: v[11],
            blowup,
            ..Default::default()
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let row = LedgerRow {
            t: 0.1,
            l2_c: 1.0 / 3.0,
            h1_semi_c: std::f64::consts::PI,
            fq_u: None,
            min_c: -1e-300,
            res_u: 2.5e-17,
            blowup: true,
            ..Default::default()
        };
        let mut led = EnergyLedger::default();
        led.push(row.clone());
        led.push(LedgerRow { fq_u: Some(0.7), ..row.clone() });
        let mut buf = Vec::new();
        led.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",NaN,"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].l2_c.to_bits(), row.l2_c.to_bits());
        assert_eq!(back[0].h1_semi_c.to_bits(), row.h1_semi_c.to_bits());
        assert_eq!(back[0].min_c.to_bits(), row.min_c.to_bits());
        assert!(back[0].fq_u.is_none() && back[1].fq_u == Some(0.7));
        assert!(back[0].blowup);
    }
}
