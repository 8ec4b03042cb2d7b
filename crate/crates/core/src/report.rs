//! Analysis report: one serializable structure rendered to both JSON and
//! text with identical numeric content. Rationals appear as exact `num/den`
//! strings plus a 12-significant-digit decimal; dB strengths are rounded to
//! two decimals, with exact-zero ratios shown as `-inf dB` in text and
//! `null` in JSON.

use crate::crosstalk::{AsymptoticReport, CrosstalkReport};
use crate::netlist::{render, Netlist};
use crate::quantize::Analysis;
use crate::ratmat::{decimal_approx, Matrix, Rational};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalDto {
    pub num: String,
    pub den: String,
    pub decimal: String,
}

impl RationalDto {
    pub fn of(value: &Rational) -> Self {
        RationalDto {
            num: value.numer().to_string(),
            den: value.denom().to_string(),
            decimal: decimal_approx(value, 12),
        }
    }

    fn text(&self) -> String {
        format!("{}/{} ({})", self.num, self.den, self.decimal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDto {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<RationalDto>>,
}

impl MatrixDto {
    fn of(matrix: &Matrix) -> Self {
        let dim = matrix.dim();
        MatrixDto {
            labels: matrix.labels().to_vec(),
            entries: (0..dim)
                .map(|i| (0..dim).map(|j| RationalDto::of(matrix.at(i, j))).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDto {
    pub label: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDto {
    pub coordinate: String,
    pub value: RationalDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkEntryDto {
    pub victim: String,
    pub ratio: RationalDto,
    /// 20 log10 of the ratio, rounded to 2 decimals; null for an exact zero.
    pub strength_db: Option<f64>,
    /// Present when an impedance-ratio correction was requested; shifts the
    /// strength by -10 log10(z_ratio) for victims other than the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveReportDto {
    pub drive: String,
    pub drive_coordinate: String,
    pub target: String,
    pub weights: Vec<WeightDto>,
    pub entries: Vec<CrosstalkEntryDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEntryDto {
    pub row: String,
    pub col: String,
    pub exact: RationalDto,
    pub approx: RationalDto,
    /// Exact relative error; null when the exact entry is zero but the
    /// approximation is not.
    pub rel_err: Option<RationalDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticDto {
    pub form: String,
    pub epsilon: RationalDto,
    pub tolerance: RationalDto,
    pub in_regime: bool,
    pub passes: bool,
    pub max_rel_err: Option<RationalDto>,
    pub entries: Vec<AsymptoticEntryDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub netlist: String,
    pub coordinates: Vec<CoordinateDto>,
    pub eliminated: Vec<String>,
    pub diagnostics: Vec<String>,
    pub maxwell: MatrixDto,
    pub reduced: MatrixDto,
    pub crosstalk: Vec<DriveReportDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<AsymptoticDto>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn db_dto(db: f64) -> Option<f64> {
    db.is_finite().then(|| round2(db))
}

impl AnalysisReport {
    pub fn build(
        netlist: &Netlist,
        analysis: &Analysis,
        crosstalk: &[CrosstalkReport],
        z_ratio: Option<f64>,
        asymptotic: Option<&AsymptoticReport>,
    ) -> Self {
        let correction = z_ratio.map(|z| -10.0 * z.log10());
        let crosstalk = crosstalk
            .iter()
            .map(|report| DriveReportDto {
                drive: report.drive.clone(),
                drive_coordinate: report.drive_coordinate.clone(),
                target: report.target.clone(),
                weights: report
                    .weights
                    .iter()
                    .map(|(coordinate, value)| WeightDto {
                        coordinate: coordinate.clone(),
                        value: RationalDto::of(value),
                    })
                    .collect(),
                entries: report
                    .entries
                    .iter()
                    .map(|e| CrosstalkEntryDto {
                        victim: e.victim.clone(),
                        ratio: RationalDto::of(&e.ratio),
                        strength_db: db_dto(e.strength_db),
                        corrected_db: match correction {
                            Some(shift) if e.victim != report.target => {
                                db_dto(e.strength_db + shift)
                            }
                            _ => None,
                        },
                    })
                    .collect(),
            })
            .collect();
        AnalysisReport {
            netlist: render(netlist),
            coordinates: analysis
                .modes
                .coordinates()
                .iter()
                .map(|c| CoordinateDto {
                    label: c.label.clone(),
                    kind: c.kind.as_str().to_owned(),
                })
                .collect(),
            eliminated: analysis.reduced.removed().to_vec(),
            diagnostics: analysis.modes.diagnostics().to_vec(),
            maxwell: MatrixDto::of(&analysis.maxwell),
            reduced: MatrixDto::of(analysis.reduced.matrix()),
            crosstalk,
            z_ratio,
            asymptotic: asymptotic.map(|report| AsymptoticDto {
                form: report.form.as_str().to_owned(),
                epsilon: RationalDto::of(&report.epsilon),
                tolerance: RationalDto::of(&(crate::ratmat::rat_int(5) * &report.epsilon)),
                in_regime: report.in_regime,
                passes: report.passes,
                max_rel_err: report.max_rel_err.as_ref().map(RationalDto::of),
                entries: report
                    .entries
                    .iter()
                    .map(|e| AsymptoticEntryDto {
                        row: e.row.clone(),
                        col: e.col.clone(),
                        exact: RationalDto::of(&e.exact),
                        approx: RationalDto::of(&e.approx),
                        rel_err: e.rel_err.as_ref().map(RationalDto::of),
                    })
                    .collect(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("netlist:\n");
        for line in self.netlist.lines() {
            let _ = writeln!(out, "  {line}");
        }
        out.push_str("\ncoordinates:\n");
        for c in &self.coordinates {
            let eliminated = if self.eliminated.contains(&c.label) {
                " (eliminated)"
            } else {
                ""
            };
            let _ = writeln!(out, "  {}: {}{}", c.label, c.kind, eliminated);
        }
        for note in &self.diagnostics {
            let _ = writeln!(out, "  note: {note}");
        }
        write_matrix(&mut out, "capacitance matrix (node basis, fF)", &self.maxwell);
        write_matrix(&mut out, "reduced capacitance matrix (fF)", &self.reduced);
        for report in &self.crosstalk {
            let _ = writeln!(
                out,
                "\ncrosstalk from drive port `{}` (coordinate {}), target {}:",
                report.drive, report.drive_coordinate, report.target
            );
            out.push_str("  weights:\n");
            for w in &report.weights {
                let _ = writeln!(out, "    {} = {}", w.coordinate, w.value.text());
            }
            out.push_str("  victims:\n");
            for e in &report.entries {
                let db = match e.strength_db {
                    Some(db) => format!("{db:.2} dB"),
                    None => "-inf dB".to_owned(),
                };
                let corrected = match e.corrected_db {
                    Some(db) => format!(" (impedance-corrected {db:.2} dB)"),
                    None => String::new(),
                };
                let _ = writeln!(
                    out,
                    "    {}: R = {} -> {}{}",
                    e.victim,
                    e.ratio.text(),
                    db,
                    corrected
                );
            }
        }
        if let Some(z) = self.z_ratio {
            let _ = writeln!(
                out,
                "\nimpedance correction: z-ratio {z} applied beyond the equal-impedance assumption"
            );
        }
        if let Some(a) = &self.asymptotic {
            let _ = writeln!(out, "\nasymptotic check ({}, large-island limit):", a.form);
            let _ = writeln!(out, "  epsilon = {}", a.epsilon.text());
            let _ = writeln!(out, "  tolerance (5 eps) = {}", a.tolerance.text());
            let max = match &a.max_rel_err {
                Some(m) => m.text(),
                None => "inf".to_owned(),
            };
            let _ = writeln!(out, "  max relative error = {max}");
            let _ = writeln!(out, "  in regime (eps <= 0.02): {}", yes_no(a.in_regime));
            let _ = writeln!(out, "  within tolerance: {}", yes_no(a.passes));
            for e in &a.entries {
                let rel = match &e.rel_err {
                    Some(r) => r.text(),
                    None => "inf".to_owned(),
                };
                let _ = writeln!(
                    out,
                    "  [{},{}]: exact {} approx {} rel err {}",
                    e.row,
                    e.col,
                    e.exact.text(),
                    e.approx.text(),
                    rel
                );
            }
        }
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write_matrix(out: &mut String, title: &str, m: &MatrixDto) {
    let _ = writeln!(out, "\n{title}:");
    let _ = writeln!(out, "  labels: {}", m.labels.join(" "));
    for i in 0..m.labels.len() {
        for j in i..m.labels.len() {
            let _ = writeln!(
                out,
                "  [{},{}] = {}",
                m.labels[i],
                m.labels[j],
                m.entries[i][j].text()
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crosstalk;
    use crate::netlist::{build_direct_coupled, DirectCoupledParams};
    use crate::quantize::analyze;
    use crate::ratmat::{rat, rat_int};

    fn sample_report() -> AnalysisReport {
        let netlist = build_direct_coupled(&DirectCoupledParams {
            c_d: rat(1, 10),
            c_q: rat_int(70),
            c_g1: rat_int(50),
            c_g2: rat_int(50),
            c_g3: rat_int(50),
            c_g4: rat_int(50),
            c_c1: rat_int(6),
            c_c2: rat_int(2),
        })
        .unwrap()
        .netlist;
        let analysis = analyze(&netlist).unwrap();
        let ct = crosstalk::report(&analysis.reduced, "d", "d", "1m").unwrap();
        AnalysisReport::build(&netlist, &analysis, &[ct], None, None)
    }

    #[test]
    fn json_roundtrips_byte_identically() {
        let report = sample_report();
        let json = report.to_json();
        let parsed: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(parsed.to_json(), json);
    }

    #[test]
    fn text_and_json_carry_identical_numbers() {
        let report = sample_report();
        let text = report.to_text();
        let entry = report.crosstalk[0]
            .entries
            .iter()
            .find(|e| e.victim == "2m")
            .unwrap();
        assert_eq!(entry.ratio.num, "1");
        assert_eq!(entry.ratio.den, "28");
        assert_eq!(entry.strength_db, Some(-28.94));
        assert!(text.contains("2m: R = 1/28 (0.0357142857143) -> -28.94 dB"));
        assert!(text.contains("[d,d] = 1/10"));
    }

    #[test]
    fn zero_ratio_renders_inf_and_null() {
        let netlist = build_direct_coupled(&DirectCoupledParams {
            c_d: rat(1, 10),
            c_q: rat_int(70),
            c_g1: rat_int(50),
            c_g2: rat_int(50),
            c_g3: rat_int(50),
            c_g4: rat_int(50),
            c_c1: rat_int(4),
            c_c2: rat_int(4),
        })
        .unwrap()
        .netlist;
        let analysis = analyze(&netlist).unwrap();
        let ct = crosstalk::report(&analysis.reduced, "d", "d", "1m").unwrap();
        let report = AnalysisReport::build(&netlist, &analysis, &[ct], None, None);
        let entry = report.crosstalk[0]
            .entries
            .iter()
            .find(|e| e.victim == "2m")
            .unwrap();
        assert_eq!(entry.strength_db, None);
        assert!(report.to_text().contains("-inf dB"));
        assert!(report.to_json().contains("\"strength_db\": null"));
    }

    #[test]
    fn impedance_correction_shifts_victims_only() {
        let netlist = build_direct_coupled(&DirectCoupledParams {
            c_d: rat(1, 10),
            c_q: rat_int(70),
            c_g1: rat_int(50),
            c_g2: rat_int(50),
            c_g3: rat_int(50),
            c_g4: rat_int(50),
            c_c1: rat_int(6),
            c_c2: rat_int(2),
        })
        .unwrap()
        .netlist;
        let analysis = analyze(&netlist).unwrap();
        let ct = crosstalk::report(&analysis.reduced, "d", "d", "1m").unwrap();
        let report = AnalysisReport::build(&netlist, &analysis, &[ct], Some(10.0), None);
        let entries = &report.crosstalk[0].entries;
        let target = entries.iter().find(|e| e.victim == "1m").unwrap();
        let victim = entries.iter().find(|e| e.victim == "2m").unwrap();
        assert_eq!(target.corrected_db, None);
        assert_eq!(victim.corrected_db, Some(round2(-28.943160626844385 - 10.0)));
    }
}
