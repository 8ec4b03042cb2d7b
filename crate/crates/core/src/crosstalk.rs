//! Crosstalk quantification: coupling weights of a drive across the reduced
//! system, exact magnitude ratios, dB strengths, closed-form layout values,
//! sweep generation, and large-island asymptotic checks.
//!
//! Ratios are exact rationals end to end; floating point appears only in the
//! final dB conversion and in the physical drive-amplitude estimate.

use crate::netlist::{
    from_preset, CouplingSide, LayoutPreset, Netlist, NetlistError, PresetBase, GROUND,
};
use crate::quantize::{analyze, CoordinateKind, QuantizeError, ReducedSystem};
use crate::ratmat::{rat, rat_int, Matrix, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrosstalkError {
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("`{0}` is not a drive coordinate")]
    NotADriveCoordinate(String),
    #[error("`{0}` is a drive coordinate and cannot be a target or victim")]
    NotAVictimCoordinate(String),
    #[error("drive is decoupled from target `{0}` (zero weight)")]
    ZeroTargetWeight(String),
    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error("parameter {0} is out of range")]
    InvalidParameter(&'static str),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// Default ratio denominator: the first qubit mode, falling back to the
/// first non-drive coordinate.
pub fn default_target(reduced: &ReducedSystem) -> Option<String> {
    let retained = reduced.retained();
    retained
        .iter()
        .find(|c| c.kind == CoordinateKind::QubitMinus)
        .or_else(|| retained.iter().find(|c| c.kind != CoordinateKind::Drive))
        .map(|c| c.label.clone())
}

/// The drive row of the reduced matrix restricted to non-drive coordinates,
/// in reduced-matrix order.
pub fn coupling_weights(
    reduced: &ReducedSystem,
    drive: &str,
) -> Result<Vec<(String, Rational)>, CrosstalkError> {
    let coord = reduced
        .coordinate(drive)
        .ok_or_else(|| CrosstalkError::UnknownCoordinate(drive.to_owned()))?;
    if coord.kind != CoordinateKind::Drive {
        return Err(CrosstalkError::NotADriveCoordinate(drive.to_owned()));
    }
    let m = reduced.matrix();
    Ok(reduced
        .retained()
        .iter()
        .filter(|c| c.kind != CoordinateKind::Drive)
        .map(|c| {
            let w = m.get(drive, &c.label).expect("retained label").clone();
            (c.label.clone(), w)
        })
        .collect())
}

fn weight_of<'a>(
    weights: &'a [(String, Rational)],
    label: &str,
) -> Result<&'a Rational, CrosstalkError> {
    weights
        .iter()
        .find(|(l, _)| l == label)
        .map(|(_, w)| w)
        .ok_or_else(|| CrosstalkError::UnknownCoordinate(label.to_owned()))
}

/// Exact magnitude ratio of the drive weight felt by `victim` to the weight
/// felt by `target`.
pub fn ratio(
    reduced: &ReducedSystem,
    drive: &str,
    target: &str,
    victim: &str,
) -> Result<Rational, CrosstalkError> {
    let weights = coupling_weights(reduced, drive)?;
    for label in [target, victim] {
        if reduced
            .coordinate(label)
            .is_some_and(|c| c.kind == CoordinateKind::Drive)
        {
            return Err(CrosstalkError::NotAVictimCoordinate(label.to_owned()));
        }
    }
    let target_weight = weight_of(&weights, target)?;
    if target_weight.is_zero() {
        return Err(CrosstalkError::ZeroTargetWeight(target.to_owned()));
    }
    let victim_weight = weight_of(&weights, victim)?;
    Ok((victim_weight / target_weight).abs())
}

fn log10_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().expect("small int").log10();
    }
    let shift = bits - 53;
    let head = (n >> shift).to_f64().expect("53-bit head");
    head.log10() + shift as f64 * std::f64::consts::LOG10_2
}

/// Strength in dB: `20 log10(R)`. A zero ratio reports negative infinity.
pub fn to_db(r: &Rational) -> f64 {
    assert!(!r.is_negative(), "ratio must be non-negative");
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    20.0 * (log10_bigint(&r.numer().abs()) - log10_bigint(r.denom()))
}

/// Exact drive-to-victim ratio of the direct-coupled circuit in terms of its
/// island and coupling capacitances. The driven qubit's own island `Cg1`,
/// the drive capacitance, and the shunts drop out.
pub fn closed_form_general(
    c_g2: &Rational,
    c_g3: &Rational,
    c_g4: &Rational,
    c_c1: &Rational,
    c_c2: &Rational,
) -> Result<Rational, CrosstalkError> {
    for (value, name) in [(c_g2, "Cg2"), (c_g3, "Cg3"), (c_g4, "Cg4")] {
        if !value.is_positive() {
            return Err(CrosstalkError::InvalidParameter(name));
        }
    }
    for (value, name) in [(c_c1, "Cc1"), (c_c2, "Cc2")] {
        if value.is_negative() {
            return Err(CrosstalkError::InvalidParameter(name));
        }
    }
    let numerator = (c_g4 * c_c1 - c_g3 * c_c2).abs();
    let denominator = (c_g3 + c_g4) * (c_c2 + c_g2) + c_g2 * (c_c1 + c_c2);
    Ok(numerator / denominator)
}

/// The ratio specialized to islands (Cg, lambda*Cg, Cg, lambda*Cg).
pub fn closed_form_lambda(
    lambda: &Rational,
    c_g: &Rational,
    c_c1: &Rational,
    c_c2: &Rational,
) -> Result<Rational, CrosstalkError> {
    if !lambda.is_positive() {
        return Err(CrosstalkError::InvalidParameter("lambda"));
    }
    if !c_g.is_positive() {
        return Err(CrosstalkError::InvalidParameter("Cg"));
    }
    for (value, name) in [(c_c1, "Cc1"), (c_c2, "Cc2")] {
        if value.is_negative() {
            return Err(CrosstalkError::InvalidParameter(name));
        }
    }
    let one = rat_int(1);
    let numerator = (lambda * c_c1 - c_c2).abs();
    let denominator = (lambda + &one) * (c_c2 + lambda * c_g) + lambda * (c_c1 + c_c2);
    Ok(numerator / denominator)
}

/// The layout-table cell for a preset, in terms of r and lambda alone.
pub fn table1_value(preset: &LayoutPreset) -> Rational {
    let r = preset.ratio();
    let lambda = preset.lambda();
    let one = rat_int(1);
    let two = rat_int(2);
    match preset.side() {
        CouplingSide::SameIsland => r / (lambda + &one + r),
        CouplingSide::OppositeIsland => {
            r / (lambda * (lambda + &one) + (&two * lambda + &one) * r)
        }
    }
}

/// Exact qubit-to-qubit ratio of the floating-bus circuit: the channel is
/// mediated by the bus free mode and closes as the bus island capacitance
/// `c_b` grows.
pub fn floating_bus_ratio(
    c_c: &Rational,
    c_g: &Rational,
    c_b: &Rational,
) -> Result<Rational, CrosstalkError> {
    if c_c.is_negative() {
        return Err(CrosstalkError::InvalidParameter("Cc"));
    }
    if !c_g.is_positive() {
        return Err(CrosstalkError::InvalidParameter("Cg"));
    }
    if !c_b.is_positive() {
        return Err(CrosstalkError::InvalidParameter("Cb"));
    }
    let two = rat_int(2);
    let four = rat_int(4);
    let numerator = c_c * c_c;
    let denominator = &two * c_b * (c_c + &two * c_g) + c_c * (c_c + &four * c_g);
    Ok(numerator / denominator)
}

/// Per-victim crosstalk from one drive port.
#[derive(Debug, Clone)]
pub struct CrosstalkEntry {
    pub victim: String,
    pub ratio: Rational,
    /// dB strength; exactly zero ratio reports negative infinity.
    pub strength_db: f64,
}

#[derive(Debug, Clone)]
pub struct CrosstalkReport {
    /// Drive port name.
    pub drive: String,
    /// Reduced-matrix coordinate the port drives.
    pub drive_coordinate: String,
    pub target: String,
    pub weights: Vec<(String, Rational)>,
    pub entries: Vec<CrosstalkEntry>,
}

/// Full crosstalk report for one drive port against a target coordinate.
pub fn report(
    reduced: &ReducedSystem,
    port_name: &str,
    drive_coordinate: &str,
    target: &str,
) -> Result<CrosstalkReport, CrosstalkError> {
    let weights = coupling_weights(reduced, drive_coordinate)?;
    if reduced
        .coordinate(target)
        .is_some_and(|c| c.kind == CoordinateKind::Drive)
    {
        return Err(CrosstalkError::NotAVictimCoordinate(target.to_owned()));
    }
    let target_weight = weight_of(&weights, target)?.clone();
    if target_weight.is_zero() {
        return Err(CrosstalkError::ZeroTargetWeight(target.to_owned()));
    }
    let entries = weights
        .iter()
        .map(|(victim, w)| {
            let r = (w / &target_weight).abs();
            let strength_db = to_db(&r);
            CrosstalkEntry {
                victim: victim.clone(),
                ratio: r,
                strength_db,
            }
        })
        .collect();
    Ok(CrosstalkReport {
        drive: port_name.to_owned(),
        drive_coordinate: drive_coordinate.to_owned(),
        target: target.to_owned(),
        weights,
        entries,
    })
}

/// Log-spaced ratio grid for sweeps.
#[derive(Debug, Clone)]
pub struct RGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl RGrid {
    /// Grid values as exact rationals, each the 12-significant-digit decimal
    /// reading of the log-spaced point.
    pub fn values(&self) -> Result<Vec<Rational>, CrosstalkError> {
        if self.points == 0 {
            return Err(CrosstalkError::InvalidGrid("points must be >= 1".into()));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite()) || self.r_min <= 0.0 {
            return Err(CrosstalkError::InvalidGrid(
                "r bounds must be finite and positive".into(),
            ));
        }
        if self.r_max < self.r_min {
            return Err(CrosstalkError::InvalidGrid("r-max must be >= r-min".into()));
        }
        let mut out = Vec::with_capacity(self.points);
        if self.points == 1 {
            out.push(decimal_12(self.r_min));
            return Ok(out);
        }
        let ln_min = self.r_min.ln();
        let ln_max = self.r_max.ln();
        for i in 0..self.points {
            let t = i as f64 / (self.points - 1) as f64;
            out.push(decimal_12((ln_min + t * (ln_max - ln_min)).exp()));
        }
        Ok(out)
    }
}

fn decimal_12(x: f64) -> Rational {
    crate::ratmat::rational_from_decimal(&format!("{x:.11e}")).expect("formatted float")
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub side: CouplingSide,
    pub lambda: Rational,
    pub r: Rational,
    pub ratio: Rational,
    pub strength_db: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV rendering with exact ratio columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layout,lambda,r,R_num,R_den,M_dB\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6}\n",
                row.side.as_str(),
                crate::ratmat::exact_literal(&row.lambda),
                crate::ratmat::exact_literal(&row.r),
                row.ratio.numer(),
                row.ratio.denom(),
                row.strength_db,
            ));
        }
        out
    }
}

/// Evaluate the layout-table ratio over a grid of (lambda, r) points, with
/// every value cross-checked against the full pipeline (a preset netlist is
/// built, reduced, and its exact ratio compared). Rows are ordered lambda
/// first, then grid index. Grid points evaluate in parallel.
pub fn sweep(
    side: CouplingSide,
    lambdas: &[Rational],
    grid: &RGrid,
) -> Result<SweepTable, CrosstalkError> {
    for lambda in lambdas {
        if *lambda < rat_int(1) {
            return Err(CrosstalkError::InvalidParameter("lambda"));
        }
    }
    let r_values = grid.values()?;
    let points: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|li| (0..r_values.len()).map(move |ri| (li, ri)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(li, ri)| sweep_point(side, &lambdas[li], &r_values[ri]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable { rows })
}

fn sweep_point(
    side: CouplingSide,
    lambda: &Rational,
    r: &Rational,
) -> Result<SweepRow, CrosstalkError> {
    let preset = LayoutPreset::asymmetric(side, rat_int(100), r.clone(), lambda.clone())?;
    let value = table1_value(&preset);
    let pipeline = preset_pipeline_ratio(&preset)?;
    if value != pipeline {
        return Err(CrosstalkError::Internal(format!(
            "table value {value} disagrees with pipeline ratio {pipeline} at lambda={lambda}, r={r}"
        )));
    }
    Ok(SweepRow {
        side,
        lambda: lambda.clone(),
        r: r.clone(),
        strength_db: to_db(&value),
        ratio: value,
    })
}

/// The full-pipeline ratio for a layout preset: build the netlist, reduce
/// it, and take the exact drive-row ratio of the two qubit modes.
pub fn preset_pipeline_ratio(preset: &LayoutPreset) -> Result<Rational, CrosstalkError> {
    let base = PresetBase {
        c_d: rat(1, 10),
        c_q: rat_int(70),
    };
    let built = from_preset(preset, &base)?;
    let analysis = analyze(&built.netlist)?;
    ratio(&analysis.reduced, "d", "1m", "2m")
}

/// Which large-island limit to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticForm {
    /// Direct-coupled qubits with equal island caps.
    DirectCoupled,
    /// Qubits joined by a grounded bus.
    GroundedBus,
    /// Qubits joined by a floating bus.
    FloatingBus,
}

impl AsymptoticForm {
    pub fn as_str(self) -> &'static str {
        match self {
            AsymptoticForm::DirectCoupled => "direct",
            AsymptoticForm::GroundedBus => "grounded-bus",
            AsymptoticForm::FloatingBus => "floating-bus",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticEntry {
    pub row: String,
    pub col: String,
    pub exact: Rational,
    pub approx: Rational,
    /// Exact relative error |exact - approx| / |exact|. None means the exact
    /// entry is zero while the approximation is not.
    pub rel_err: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub form: AsymptoticForm,
    /// max(coupling caps) / min(island and shunt caps)
    pub epsilon: Rational,
    pub entries: Vec<AsymptoticEntry>,
    pub max_rel_err: Option<Rational>,
    /// Whether epsilon is small enough (<= 1/50) for the tolerance claim.
    pub in_regime: bool,
    /// True when in regime and every entry error is within 5 * epsilon.
    pub passes: bool,
}

/// Compare the reduced matrix against the matching large-island approximate
/// form. The netlist must have the canonical topology for `form`; extra
/// elements, unequal islands, or unequal shunts are a topology mismatch.
pub fn asymptotic_check(
    netlist: &Netlist,
    reduced: &ReducedSystem,
    form: AsymptoticForm,
) -> Result<AsymptoticReport, CrosstalkError> {
    let (approx, couplings, bulks) = match form {
        AsymptoticForm::DirectCoupled => shapes::direct_approx(netlist)?,
        AsymptoticForm::GroundedBus => shapes::grounded_bus_approx(netlist)?,
        AsymptoticForm::FloatingBus => shapes::floating_bus_approx(netlist)?,
    };
    let exact = reduced.matrix();
    if exact.labels() != approx.labels() {
        return Err(CrosstalkError::Internal(format!(
            "approximate form labels {:?} do not match reduced labels {:?}",
            approx.labels(),
            exact.labels()
        )));
    }
    let mut entries = Vec::new();
    let mut max_rel_err: Option<Rational> = Some(Rational::zero());
    for i in 0..exact.dim() {
        for j in i..exact.dim() {
            let e = exact.at(i, j);
            let a = approx.at(i, j);
            let rel_err = if e.is_zero() && a.is_zero() {
                Some(Rational::zero())
            } else if e.is_zero() {
                None
            } else {
                Some(((e - a) / e).abs())
            };
            match (&mut max_rel_err, &rel_err) {
                (Some(m), Some(r)) => {
                    if r > m {
                        *m = r.clone();
                    }
                }
                (m, None) => *m = None,
                _ => {}
            }
            entries.push(AsymptoticEntry {
                row: exact.labels()[i].clone(),
                col: exact.labels()[j].clone(),
                exact: e.clone(),
                approx: a.clone(),
                rel_err,
            });
        }
    }
    let epsilon = couplings.iter().max().expect("couplings").clone()
        / bulks.iter().min().expect("bulks").clone();
    let in_regime = epsilon <= rat(1, 50);
    let threshold = rat_int(5) * &epsilon;
    let passes = in_regime
        && match &max_rel_err {
            Some(m) => *m <= threshold,
            None => false,
        };
    Ok(AsymptoticReport {
        form,
        epsilon,
        entries,
        max_rel_err,
        in_regime,
        passes,
    })
}

/// Try each topology in turn; used by the CLI flag that adds the check when
/// the circuit matches one of the canonical families.
pub fn detect_asymptotic_form(netlist: &Netlist) -> Option<AsymptoticForm> {
    [
        AsymptoticForm::DirectCoupled,
        AsymptoticForm::GroundedBus,
        AsymptoticForm::FloatingBus,
    ]
    .into_iter()
    .find(|form| match form {
        AsymptoticForm::DirectCoupled => shapes::direct_approx(netlist).is_ok(),
        AsymptoticForm::GroundedBus => shapes::grounded_bus_approx(netlist).is_ok(),
        AsymptoticForm::FloatingBus => shapes::floating_bus_approx(netlist).is_ok(),
    })
}

/// Topology matchers that recognize the canonical circuits structurally
/// (names do not matter) and produce the approximate reduced matrix with
/// the same labels the pipeline will use.
mod shapes {
    use super::*;

    struct CapTable {
        pairs: Vec<((String, String), Rational)>,
    }

    impl CapTable {
        fn of(netlist: &Netlist) -> Self {
            let mut pairs: Vec<((String, String), Rational)> = Vec::new();
            for c in netlist.capacitors() {
                let key = if c.node_a <= c.node_b {
                    (c.node_a.clone(), c.node_b.clone())
                } else {
                    (c.node_b.clone(), c.node_a.clone())
                };
                match pairs.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => *v += &c.value_ff,
                    None => pairs.push((key, c.value_ff.clone())),
                }
            }
            CapTable { pairs }
        }

        fn between(&self, a: &str, b: &str) -> Option<&Rational> {
            let key = if a <= b { (a, b) } else { (b, a) };
            self.pairs
                .iter()
                .find(|((x, y), _)| (x.as_str(), y.as_str()) == key)
                .map(|(_, v)| v)
        }

        fn count(&self) -> usize {
            self.pairs.len()
        }

        fn incident(&self, node: &str) -> usize {
            self.pairs
                .iter()
                .filter(|((a, b), _)| a == node || b == node)
                .count()
        }
    }

    fn mismatch(msg: impl Into<String>) -> CrosstalkError {
        CrosstalkError::TopologyMismatch(msg.into())
    }

    struct DriveSide {
        drive_node: String,
        c_d: Rational,
        driven_island: String,
    }

    fn single_drive(netlist: &Netlist, caps: &CapTable) -> Result<DriveSide, CrosstalkError> {
        let [port] = netlist.drives() else {
            return Err(mismatch("expected exactly one drive port"));
        };
        let node = port.source_node.clone();
        if caps.incident(&node) != 1 {
            return Err(mismatch("drive node must have exactly one capacitor"));
        }
        let ((a, b), c_d) = caps
            .pairs
            .iter()
            .find(|((a, b), _)| *a == node || *b == node)
            .expect("incident capacitor")
            .clone();
        let other = if a == node { b } else { a };
        if other == GROUND {
            return Err(mismatch("drive couples only to ground"));
        }
        Ok(DriveSide {
            drive_node: node,
            c_d,
            driven_island: other,
        })
    }

    /// Qubit junction islands paired with their mode labels, driven side
    /// resolved: returns (driven island, far island, minus label).
    fn qubit_of(
        netlist: &Netlist,
        island: &str,
    ) -> Result<(String, String, String), CrosstalkError> {
        for (junction, (minus, _plus)) in netlist.junction_mode_labels() {
            if junction.node_a == island {
                return Ok((junction.node_a.clone(), junction.node_b.clone(), minus));
            }
            if junction.node_b == island {
                return Ok((junction.node_b.clone(), junction.node_a.clone(), minus));
            }
        }
        Err(mismatch(format!("island `{island}` has no floating junction")))
    }

    fn equal_or_mismatch(
        values: &[Option<&Rational>],
        what: &str,
    ) -> Result<Rational, CrosstalkError> {
        let mut iter = values.iter();
        let Some(Some(first)) = iter.next() else {
            return Err(mismatch(format!("missing {what}")));
        };
        for v in iter {
            match v {
                Some(v) if v == first => {}
                Some(_) => return Err(mismatch(format!("{what} values differ"))),
                None => return Err(mismatch(format!("missing {what}"))),
            }
        }
        Ok((*first).clone())
    }

    type ApproxShape = (Matrix, Vec<Rational>, Vec<Rational>);

    pub(super) fn direct_approx(netlist: &Netlist) -> Result<ApproxShape, CrosstalkError> {
        let caps = CapTable::of(netlist);
        let floating: Vec<_> = netlist.junctions().iter().filter(|j| j.is_floating()).collect();
        if netlist.nodes().len() != 5
            || floating.len() != 2
            || netlist.junctions().len() != 2
        {
            return Err(mismatch("expected a drive node plus two floating qubits"));
        }
        let drive = single_drive(netlist, &caps)?;
        let (q1_driven, q1_far, _q1_minus) = qubit_of(netlist, &drive.driven_island)?;
        let q2 = floating
            .iter()
            .find(|j| j.node_a != q1_driven && j.node_b != q1_driven)
            .ok_or_else(|| mismatch("missing second qubit"))?;
        // orient qubit 2 by the couplers: island 3 faces the driven island
        let (q2_near, q2_far) = match (
            caps.between(&q1_driven, &q2.node_a).is_some()
                || caps.between(&q1_far, &q2.node_b).is_some(),
            caps.between(&q1_driven, &q2.node_b).is_some()
                || caps.between(&q1_far, &q2.node_a).is_some(),
        ) {
            (_, false) => (q2.node_a.clone(), q2.node_b.clone()),
            (false, true) => (q2.node_b.clone(), q2.node_a.clone()),
            (true, true) => return Err(mismatch("couplers attach to both islands of qubit 2")),
        };
        let c_q = equal_or_mismatch(
            &[
                caps.between(&q1_driven, &q1_far),
                caps.between(&q2_near, &q2_far),
            ],
            "qubit shunt capacitance",
        )?;
        let c_g = equal_or_mismatch(
            &[
                caps.between(&q1_driven, GROUND),
                caps.between(&q1_far, GROUND),
                caps.between(&q2_near, GROUND),
                caps.between(&q2_far, GROUND),
            ],
            "island capacitance (the limit needs all four equal)",
        )?;
        let c_c1 = caps.between(&q1_driven, &q2_near).cloned().unwrap_or_else(Rational::zero);
        let c_c2 = caps.between(&q1_far, &q2_far).cloned().unwrap_or_else(Rational::zero);
        let expected = 7
            + usize::from(!c_c1.is_zero())
            + usize::from(!c_c2.is_zero());
        if caps.count() != expected {
            return Err(mismatch("unexpected extra capacitors"));
        }
        let reduced_labels = reduced_label_order(netlist);
        let half = rat(1, 2);
        let quarter = rat(1, 4);
        let d = &drive.c_d;
        let d_1m = -(d * &half);
        let d_2m = -(d * (&c_c1 - &c_c2) / (rat_int(4) * &c_g));
        let diag_q = &c_q + &c_g * &half;
        let m1_m2 = -((&c_c1 + &c_c2) * &quarter);
        let approx = matrix_from_labeled(
            &reduced_labels,
            &[
                ("d", "d", d.clone()),
                ("d", "1m", d_1m),
                ("d", "2m", d_2m),
                ("1m", "1m", diag_q.clone()),
                ("1m", "2m", m1_m2),
                ("2m", "2m", diag_q),
            ],
            netlist,
        )?;
        Ok((
            approx,
            vec![drive.c_d.clone(), c_c1, c_c2],
            vec![c_g, c_q],
        ))
    }

    pub(super) fn grounded_bus_approx(netlist: &Netlist) -> Result<ApproxShape, CrosstalkError> {
        let caps = CapTable::of(netlist);
        let floating: Vec<_> = netlist.junctions().iter().filter(|j| j.is_floating()).collect();
        let grounded: Vec<_> = netlist.junctions().iter().filter(|j| !j.is_floating()).collect();
        if netlist.nodes().len() != 6 || floating.len() != 2 || grounded.len() != 1 {
            return Err(mismatch(
                "expected a drive node, two floating qubits, and one grounded bus",
            ));
        }
        let bus = grounded[0].node_a.clone();
        let drive = single_drive(netlist, &caps)?;
        let (q1_driven, q1_far, _) = qubit_of(netlist, &drive.driven_island)?;
        let q2 = floating
            .iter()
            .find(|j| j.node_a != q1_driven && j.node_b != q1_driven)
            .ok_or_else(|| mismatch("missing second qubit"))?;
        let (q2_near, q2_far) = match (
            caps.between(&bus, &q2.node_a).is_some(),
            caps.between(&bus, &q2.node_b).is_some(),
        ) {
            (true, false) => (q2.node_a.clone(), q2.node_b.clone()),
            (false, true) => (q2.node_b.clone(), q2.node_a.clone()),
            (true, true) => return Err(mismatch("bus couples to both islands of qubit 2")),
            (false, false) => (q2.node_a.clone(), q2.node_b.clone()),
        };
        let c_t = caps
            .between(&bus, GROUND)
            .cloned()
            .ok_or_else(|| mismatch("bus has no shunt to ground"))?;
        let c_q = equal_or_mismatch(
            &[
                caps.between(&q1_driven, &q1_far),
                caps.between(&q2_near, &q2_far),
            ],
            "qubit shunt capacitance",
        )?;
        let c_g = equal_or_mismatch(
            &[
                caps.between(&q1_driven, GROUND),
                caps.between(&q1_far, GROUND),
                caps.between(&q2_near, GROUND),
                caps.between(&q2_far, GROUND),
            ],
            "island capacitance (the limit needs all four equal)",
        )?;
        let coupler_1 = caps.between(&q1_driven, &bus);
        let coupler_2 = caps.between(&bus, &q2_near);
        let c_c = match (coupler_1, coupler_2) {
            (None, None) => Rational::zero(),
            pair => equal_or_mismatch(&[pair.0, pair.1], "bus coupling capacitance")?,
        };
        let expected = 8 + 2 * usize::from(!c_c.is_zero());
        if caps.count() != expected {
            return Err(mismatch("unexpected extra capacitors"));
        }
        let reduced_labels = reduced_label_order(netlist);
        let half = rat(1, 2);
        let d = &drive.c_d;
        let diag_q = &c_q + &c_g * &half;
        let approx = matrix_from_labeled(
            &reduced_labels,
            &[
                ("d", "d", d.clone()),
                ("d", "1m", -(d * &half)),
                ("d", "t", -(d * &c_c / (rat_int(2) * &c_g))),
                ("d", "2m", Rational::zero()),
                ("1m", "1m", diag_q.clone()),
                ("1m", "t", -(&c_c * &half)),
                ("1m", "2m", Rational::zero()),
                ("t", "t", c_t.clone()),
                ("t", "2m", -(&c_c * &half)),
                ("2m", "2m", diag_q),
            ],
            netlist,
        )?;
        Ok((
            approx,
            vec![drive.c_d.clone(), c_c],
            vec![c_g, c_q, c_t],
        ))
    }

    pub(super) fn floating_bus_approx(netlist: &Netlist) -> Result<ApproxShape, CrosstalkError> {
        let caps = CapTable::of(netlist);
        let floating: Vec<_> = netlist.junctions().iter().filter(|j| j.is_floating()).collect();
        if netlist.nodes().len() != 7 || floating.len() != 3 || netlist.junctions().len() != 3 {
            return Err(mismatch(
                "expected a drive node, two floating qubits, and a floating bus",
            ));
        }
        let drive = single_drive(netlist, &caps)?;
        let (q1_driven, q1_far, _) = qubit_of(netlist, &drive.driven_island)?;
        // the bus is the junction capacitively tied to the driven island
        let bus = floating
            .iter()
            .find(|j| {
                (j.node_a != q1_driven && j.node_b != q1_driven)
                    && (caps.between(&q1_driven, &j.node_a).is_some()
                        || caps.between(&q1_driven, &j.node_b).is_some())
            })
            .ok_or_else(|| mismatch("no bus junction couples to the driven island"))?;
        let (bus_near, bus_far) = if caps.between(&q1_driven, &bus.node_a).is_some() {
            (bus.node_a.clone(), bus.node_b.clone())
        } else {
            (bus.node_b.clone(), bus.node_a.clone())
        };
        let q2 = floating
            .iter()
            .find(|j| {
                j.node_a != q1_driven
                    && j.node_b != q1_driven
                    && (j.node_a != bus.node_a || j.node_b != bus.node_b)
            })
            .ok_or_else(|| mismatch("missing second qubit"))?;
        let (q2_near, q2_far) = match (
            caps.between(&bus_far, &q2.node_a).is_some(),
            caps.between(&bus_far, &q2.node_b).is_some(),
        ) {
            (true, false) => (q2.node_a.clone(), q2.node_b.clone()),
            (false, true) => (q2.node_b.clone(), q2.node_a.clone()),
            (true, true) => return Err(mismatch("bus couples to both islands of qubit 2")),
            (false, false) => return Err(mismatch("far bus island does not couple to qubit 2")),
        };
        let c_t = caps
            .between(&bus_near, &bus_far)
            .cloned()
            .ok_or_else(|| mismatch("bus has no internal capacitance"))?;
        let c_b = equal_or_mismatch(
            &[
                caps.between(&bus_near, GROUND),
                caps.between(&bus_far, GROUND),
            ],
            "bus island capacitance",
        )?;
        let c_q = equal_or_mismatch(
            &[
                caps.between(&q1_driven, &q1_far),
                caps.between(&q2_near, &q2_far),
            ],
            "qubit shunt capacitance",
        )?;
        let c_g = equal_or_mismatch(
            &[
                caps.between(&q1_driven, GROUND),
                caps.between(&q1_far, GROUND),
                caps.between(&q2_near, GROUND),
                caps.between(&q2_far, GROUND),
            ],
            "island capacitance (the limit needs all four equal)",
        )?;
        let c_c = equal_or_mismatch(
            &[
                caps.between(&q1_driven, &bus_near),
                caps.between(&bus_far, &q2_near),
            ],
            "bus coupling capacitance",
        )?;
        if caps.count() != 12 {
            return Err(mismatch("unexpected extra capacitors"));
        }
        let reduced_labels = reduced_label_order(netlist);
        let half = rat(1, 2);
        let quarter = rat(1, 4);
        let d = &drive.c_d;
        let diag_q = &c_q + &c_g * &half;
        let eight = rat_int(8);
        let approx = matrix_from_labeled(
            &reduced_labels,
            &[
                ("d", "d", d.clone()),
                ("d", "1m", -(d * &half)),
                ("d", "t", -(d * &c_c / (rat_int(4) * &c_g))),
                ("d", "2m", -(&c_c * &c_c * d / (&eight * &c_b * &c_g))),
                ("1m", "1m", diag_q.clone()),
                ("1m", "t", -(&c_c * &quarter)),
                ("1m", "2m", -(&c_c * &c_c / (&eight * &c_b))),
                ("t", "t", &c_t + &c_b * &half),
                ("t", "2m", &c_c * &quarter),
                ("2m", "2m", diag_q),
            ],
            netlist,
        )?;
        Ok((
            approx,
            vec![drive.c_d.clone(), c_c],
            vec![c_g, c_q, c_t, c_b],
        ))
    }

    /// Retained labels in the order the pipeline reports them, but expressed
    /// through the canonical role names used by the entry tables above.
    fn reduced_label_order(netlist: &Netlist) -> Vec<String> {
        let modes = crate::quantize::build_modes(netlist);
        let mut order: Vec<String> = Vec::new();
        for d in netlist.drives() {
            if !order.contains(&d.source_node) {
                order.push(d.source_node.clone());
            }
        }
        for c in modes.retained() {
            if !order.contains(&c.label) {
                order.push(c.label.clone());
            }
        }
        order
    }

    /// Build the approximate matrix over `labels` from (role, role, value)
    /// triples, where roles are the canonical names d / 1m / t / 2m, mapped
    /// to the actual coordinate labels of this netlist.
    fn matrix_from_labeled(
        labels: &[String],
        entries: &[(&str, &str, Rational)],
        netlist: &Netlist,
    ) -> Result<Matrix, CrosstalkError> {
        let role_of = role_map(netlist)?;
        let dim = labels.len();
        let mut grid = vec![Rational::zero(); dim * dim];
        let index = |label: &str| labels.iter().position(|l| l == label);
        for (a, b, value) in entries {
            let la = role_of(a).ok_or_else(|| mismatch(format!("no coordinate for role {a}")))?;
            let lb = role_of(b).ok_or_else(|| mismatch(format!("no coordinate for role {b}")))?;
            let i = index(&la)
                .ok_or_else(|| CrosstalkError::Internal(format!("label {la} missing")))?;
            let j = index(&lb)
                .ok_or_else(|| CrosstalkError::Internal(format!("label {lb} missing")))?;
            grid[i * dim + j] = value.clone();
            grid[j * dim + i] = value.clone();
        }
        Ok(Matrix::from_raw_symmetric(labels.to_vec(), grid))
    }

    /// Maps canonical roles onto actual coordinate labels: `d` is the drive
    /// node, `1m` the driven qubit's minus mode, `t` the bus coordinate, and
    /// `2m` the far qubit's minus mode.
    fn role_map(netlist: &Netlist) -> Result<impl Fn(&str) -> Option<String>, CrosstalkError> {
        let caps = CapTable::of(netlist);
        let drive = single_drive(netlist, &caps)?;
        let (q1_driven, _, q1_minus) = qubit_of(netlist, &drive.driven_island)?;
        let mode_labels = netlist.junction_mode_labels();
        let mut q2_minus = None;
        let mut bus_minus = None;
        for (junction, (minus, _)) in &mode_labels {
            if junction.node_a == q1_driven || junction.node_b == q1_driven {
                continue;
            }
            let touches_q1 = caps.between(&q1_driven, &junction.node_a).is_some()
                || caps.between(&q1_driven, &junction.node_b).is_some();
            if touches_q1 && mode_labels.len() == 3 {
                bus_minus = Some(minus.clone());
            } else {
                q2_minus = Some(minus.clone());
            }
        }
        let grounded_bus = netlist
            .junctions()
            .iter()
            .find(|j| !j.is_floating())
            .map(|j| j.node_a.clone());
        let drive_node = drive.drive_node;
        Ok(move |role: &str| match role {
            "d" => Some(drive_node.clone()),
            "1m" => Some(q1_minus.clone()),
            "2m" => q2_minus.clone(),
            "t" => bus_minus.clone().or_else(|| grounded_bus.clone()),
            _ => None,
        })
    }
}

/// Physical drive magnitude for a grounded transmon driven through `c_d`:
/// an angular frequency computed from the zero-point charge fluctuation of
/// the qubit impedance. Inputs are inexact physical quantities, so this is
/// the one floating-point operation in the module.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveAmplitude {
    pub omega_rad_per_s: f64,
    pub q_zpf_coulombs: f64,
    pub z_q_ohms: f64,
    pub c_d_ff: f64,
    pub c_q_ff: f64,
    pub v_d_volts: f64,
    pub l_nh: f64,
    pub c_ff: f64,
}

/// Reduced Planck constant, J s (exact SI h over 2 pi).
const HBAR: f64 = 6.626_070_15e-34 / (2.0 * std::f64::consts::PI);

/// `omega = (C_d / C_q) * Q_zpf * V_d / hbar` with `Q_zpf = sqrt(hbar / 2 Z_q)`
/// and `Z_q = sqrt(L / C)`.
///
/// `c_ff` is the qubit capacitance entering the impedance; pass either the
/// bare shunt or the reduced-matrix diagonal (shunt plus half the island
/// capacitance) depending on which effective mode capacitance is meant.
pub fn drive_amplitude(
    c_d_ff: f64,
    c_q_ff: f64,
    v_d_volts: f64,
    l_nh: f64,
    c_ff: f64,
) -> Result<DriveAmplitude, CrosstalkError> {
    for (value, name) in [(l_nh, "L"), (c_ff, "C"), (c_q_ff, "Cq")] {
        if !value.is_finite() || value <= 0.0 {
            return Err(CrosstalkError::InvalidParameter(name));
        }
    }
    if c_d_ff < 0.0 {
        return Err(CrosstalkError::InvalidParameter("Cd"));
    }
    let z_q = (l_nh * 1e-9 / (c_ff * 1e-15)).sqrt();
    let q_zpf = (HBAR / (2.0 * z_q)).sqrt();
    let omega = (c_d_ff / c_q_ff) * q_zpf * v_d_volts / HBAR;
    Ok(DriveAmplitude {
        omega_rad_per_s: omega,
        q_zpf_coulombs: q_zpf,
        z_q_ohms: z_q,
        c_d_ff,
        c_q_ff,
        v_d_volts,
        l_nh,
        c_ff,
    })
}
