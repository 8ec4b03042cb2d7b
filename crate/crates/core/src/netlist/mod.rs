//! Lumped-element netlists: nodes, capacitors, Josephson junctions, drive
//! ports, plus builders for the canonical coupled-qubit circuits and the
//! geometric layout presets.
//!
//! Ground is the reserved node id `gnd`. A node may participate in at most
//! one junction, which keeps the plus/minus mode construction unambiguous.

mod parser;

pub use parser::{parse, render};

use crate::ratmat::{rat_int, Rational};
use num_traits::Zero;
use thiserror::Error;

pub const GROUND: &str = "gnd";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("netlist declares no nodes")]
    NoNodes,
    #[error("invalid node id `{0}` (allowed: [A-Za-z0-9_]+, `gnd` reserved)")]
    InvalidNodeId(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("capacitor connects `{0}` to itself")]
    SelfCapacitor(String),
    #[error("capacitance between `{0}` and `{1}` must be positive")]
    NonPositiveCapacitance(String, String),
    #[error("junction endpoints `{0}` and `{1}` must differ")]
    SelfJunction(String, String),
    #[error("junction first endpoint may not be `gnd`")]
    JunctionFromGround,
    #[error("node `{0}` participates in more than one junction")]
    NodeInMultipleJunctions(String),
    #[error("junction energy must be positive")]
    NonPositiveJosephsonEnergy,
    #[error("mode labels are only valid on floating junctions")]
    ModeLabelsOnGroundedJunction,
    #[error("invalid mode label `{0}`")]
    InvalidModeLabel(String),
    #[error("duplicate drive port `{0}`")]
    DuplicateDrivePort(String),
    #[error("drive source `{0}` participates in a junction")]
    DriveSourceHasJunction(String),
    #[error("drive source `{0}` has no capacitor to the rest of the circuit")]
    DriveSourceNotCoupled(String),
    #[error("coordinate label `{0}` is used more than once")]
    CoordinateLabelClash(String),
    #[error("layout preset: {0}")]
    InvalidPreset(String),
    #[error("builder parameter {name} must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
    },
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// A capacitor between two nodes; `node_b` may be `gnd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capacitor {
    pub node_a: String,
    pub node_b: String,
    pub value_ff: Rational,
}

/// A Josephson junction. Floating when `node_b` is not ground. The optional
/// energy is informational only and never evaluated. `mode_labels`, when
/// set on a floating junction, names the (minus, plus) coordinates of its
/// island pair; unlabeled floating junctions get `<k>m` / `<k>p` by
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Junction {
    pub node_a: String,
    pub node_b: String,
    pub josephson_energy_ghz: Option<Rational>,
    pub mode_labels: Option<(String, String)>,
}

impl Junction {
    pub fn is_floating(&self) -> bool {
        self.node_b != GROUND
    }
}

/// A voltage-source port attached to an ordinary circuit node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrivePort {
    pub name: String,
    pub source_node: String,
}

/// A validated lumped circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    nodes: Vec<String>,
    capacitors: Vec<Capacitor>,
    junctions: Vec<Junction>,
    drives: Vec<DrivePort>,
}

impl Netlist {
    pub fn new(
        nodes: Vec<String>,
        mut capacitors: Vec<Capacitor>,
        junctions: Vec<Junction>,
        drives: Vec<DrivePort>,
    ) -> Result<Self, NetlistError> {
        if nodes.is_empty() {
            return Err(NetlistError::NoNodes);
        }
        // ground, when present, always sits in node_b
        for c in &mut capacitors {
            if c.node_a == GROUND && c.node_b != GROUND {
                std::mem::swap(&mut c.node_a, &mut c.node_b);
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            if !is_valid_id(n) || n == GROUND {
                return Err(NetlistError::InvalidNodeId(n.clone()));
            }
            if nodes[..i].contains(n) {
                return Err(NetlistError::DuplicateNode(n.clone()));
            }
        }
        let declared = |id: &str| nodes.iter().any(|n| n == id);
        for c in &capacitors {
            if c.node_a == c.node_b {
                return Err(NetlistError::SelfCapacitor(c.node_a.clone()));
            }
            for end in [&c.node_a, &c.node_b] {
                if end != GROUND && !declared(end) {
                    return Err(NetlistError::UnknownNode(end.clone()));
                }
            }
            if c.value_ff <= Rational::zero() {
                return Err(NetlistError::NonPositiveCapacitance(
                    c.node_a.clone(),
                    c.node_b.clone(),
                ));
            }
        }
        let mut junction_nodes: Vec<&str> = Vec::new();
        for j in &junctions {
            if j.node_a == GROUND {
                return Err(NetlistError::JunctionFromGround);
            }
            if j.node_a == j.node_b {
                return Err(NetlistError::SelfJunction(
                    j.node_a.clone(),
                    j.node_b.clone(),
                ));
            }
            for end in [&j.node_a, &j.node_b] {
                if end != GROUND {
                    if !declared(end) {
                        return Err(NetlistError::UnknownNode(end.clone()));
                    }
                    if junction_nodes.contains(&end.as_str()) {
                        return Err(NetlistError::NodeInMultipleJunctions(end.clone()));
                    }
                    junction_nodes.push(end);
                }
            }
            if let Some(ej) = &j.josephson_energy_ghz {
                if *ej <= Rational::zero() {
                    return Err(NetlistError::NonPositiveJosephsonEnergy);
                }
            }
            if let Some((minus, plus)) = &j.mode_labels {
                if !j.is_floating() {
                    return Err(NetlistError::ModeLabelsOnGroundedJunction);
                }
                for label in [minus, plus] {
                    if !is_valid_id(label) || label == GROUND {
                        return Err(NetlistError::InvalidModeLabel(label.clone()));
                    }
                }
            }
        }
        for (i, d) in drives.iter().enumerate() {
            if !is_valid_id(&d.name) {
                return Err(NetlistError::InvalidNodeId(d.name.clone()));
            }
            if drives[..i].iter().any(|p| p.name == d.name) {
                return Err(NetlistError::DuplicateDrivePort(d.name.clone()));
            }
            if !declared(&d.source_node) {
                return Err(NetlistError::UnknownNode(d.source_node.clone()));
            }
            if junction_nodes.contains(&d.source_node.as_str()) {
                return Err(NetlistError::DriveSourceHasJunction(d.source_node.clone()));
            }
            let coupled = capacitors.iter().any(|c| {
                (c.node_a == d.source_node && c.node_b != GROUND)
                    || (c.node_b == d.source_node && c.node_a != GROUND)
            });
            if !coupled {
                return Err(NetlistError::DriveSourceNotCoupled(d.source_node.clone()));
            }
        }
        let netlist = Netlist {
            nodes,
            capacitors,
            junctions,
            drives,
        };
        // Coordinate labels must be unique across retained node names and
        // junction mode names.
        let mut labels: Vec<String> = Vec::new();
        for coord in netlist.coordinate_labels() {
            if labels.contains(&coord) {
                return Err(NetlistError::CoordinateLabelClash(coord));
            }
            labels.push(coord);
        }
        Ok(netlist)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn capacitors(&self) -> &[Capacitor] {
        &self.capacitors
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn drives(&self) -> &[DrivePort] {
        &self.drives
    }

    pub fn junction_of(&self, node: &str) -> Option<&Junction> {
        self.junctions
            .iter()
            .find(|j| j.node_a == node || j.node_b == node)
    }

    pub fn is_drive_source(&self, node: &str) -> bool {
        self.drives.iter().any(|d| d.source_node == node)
    }

    /// Effective (minus, plus) mode labels of each floating junction, in
    /// declaration order. Unlabeled junctions are numbered `1m/1p`, `2m/2p`,
    /// and so on by their position among the floating junctions.
    pub fn junction_mode_labels(&self) -> Vec<(&Junction, (String, String))> {
        let mut out = Vec::new();
        let mut index = 0usize;
        for j in self.junctions.iter().filter(|j| j.is_floating()) {
            index += 1;
            let labels = match &j.mode_labels {
                Some((m, p)) => (m.clone(), p.clone()),
                None => (format!("{index}m"), format!("{index}p")),
            };
            out.push((j, labels));
        }
        out
    }

    /// Every coordinate label the mode construction will produce: node names
    /// for junction-free and grounded-junction nodes, mode names for floating
    /// junction pairs.
    fn coordinate_labels(&self) -> Vec<String> {
        let mode_labels = self.junction_mode_labels();
        let mut out = Vec::new();
        for node in &self.nodes {
            match mode_labels
                .iter()
                .find(|(j, _)| &j.node_a == node || &j.node_b == node)
            {
                Some((j, (minus, plus))) => {
                    out.push(if &j.node_a == node { plus.clone() } else { minus.clone() });
                }
                None => out.push(node.clone()),
            }
        }
        out
    }
}

/// A constructed netlist plus non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct NetlistBuild {
    pub netlist: Netlist,
    pub warnings: Vec<String>,
}

fn require_positive(
    value: &Rational,
    name: &'static str,
) -> Result<(), NetlistError> {
    if *value <= Rational::zero() {
        return Err(NetlistError::InvalidParameter {
            name,
            requirement: "positive",
        });
    }
    Ok(())
}

fn require_non_negative(
    value: &Rational,
    name: &'static str,
) -> Result<(), NetlistError> {
    if *value < Rational::zero() {
        return Err(NetlistError::InvalidParameter {
            name,
            requirement: "non-negative",
        });
    }
    Ok(())
}

fn cap(a: &str, b: &str, value: &Rational) -> Capacitor {
    Capacitor {
        node_a: a.to_owned(),
        node_b: b.to_owned(),
        value_ff: value.clone(),
    }
}

fn junction(a: &str, b: &str, minus: &str, plus: &str) -> Junction {
    Junction {
        node_a: a.to_owned(),
        node_b: b.to_owned(),
        josephson_energy_ghz: None,
        mode_labels: Some((minus.to_owned(), plus.to_owned())),
    }
}

fn grounded_junction(a: &str) -> Junction {
    Junction {
        node_a: a.to_owned(),
        node_b: GROUND.to_owned(),
        josephson_energy_ghz: None,
        mode_labels: None,
    }
}

fn names(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| (*s).to_owned()).collect()
}

/// Two floating qubits (islands 1,2 and 3,4) coupled by direct capacitors,
/// with a voltage source at node `d` attached to island 1 through `c_d`.
/// `c_c1` joins the driven islands (1-3), `c_c2` the far islands (2-4);
/// either may be zero, in which case that capacitor is omitted entirely.
#[derive(Debug, Clone)]
pub struct DirectCoupledParams {
    pub c_d: Rational,
    pub c_q: Rational,
    pub c_g1: Rational,
    pub c_g2: Rational,
    pub c_g3: Rational,
    pub c_g4: Rational,
    pub c_c1: Rational,
    pub c_c2: Rational,
}

pub fn build_direct_coupled(p: &DirectCoupledParams) -> Result<NetlistBuild, NetlistError> {
    require_positive(&p.c_d, "Cd")?;
    require_positive(&p.c_q, "Cq")?;
    require_positive(&p.c_g1, "Cg1")?;
    require_positive(&p.c_g2, "Cg2")?;
    require_positive(&p.c_g3, "Cg3")?;
    require_positive(&p.c_g4, "Cg4")?;
    require_non_negative(&p.c_c1, "Cc1")?;
    require_non_negative(&p.c_c2, "Cc2")?;
    let mut capacitors = vec![
        cap("d", "1", &p.c_d),
        cap("1", "2", &p.c_q),
        cap("3", "4", &p.c_q),
        cap("1", GROUND, &p.c_g1),
        cap("2", GROUND, &p.c_g2),
        cap("3", GROUND, &p.c_g3),
        cap("4", GROUND, &p.c_g4),
    ];
    if !p.c_c1.is_zero() {
        capacitors.push(cap("1", "3", &p.c_c1));
    }
    if !p.c_c2.is_zero() {
        capacitors.push(cap("2", "4", &p.c_c2));
    }
    let netlist = Netlist::new(
        names(&["d", "1", "2", "3", "4"]),
        capacitors,
        vec![junction("1", "2", "1m", "1p"), junction("3", "4", "2m", "2p")],
        vec![DrivePort {
            name: "d".to_owned(),
            source_node: "d".to_owned(),
        }],
    )?;
    let mut warnings = Vec::new();
    if p.c_c1.is_zero() && p.c_c2.is_zero() {
        warnings.push("both coupling capacitors are zero; the qubits are decoupled".to_owned());
    }
    Ok(NetlistBuild { netlist, warnings })
}

/// Two floating qubits coupled through a grounded bus: a single bus node `t`
/// with a junction to ground and shunt `c_t`, joined by `c_c` to the driven
/// island of qubit 1 and to island 3 of qubit 2. All four qubit islands
/// carry `c_g`.
#[derive(Debug, Clone)]
pub struct GroundedBusParams {
    pub c_d: Rational,
    pub c_q: Rational,
    pub c_g: Rational,
    pub c_c: Rational,
    pub c_t: Rational,
}

pub fn build_grounded_bus(p: &GroundedBusParams) -> Result<NetlistBuild, NetlistError> {
    require_positive(&p.c_d, "Cd")?;
    require_positive(&p.c_q, "Cq")?;
    require_positive(&p.c_g, "Cg")?;
    require_positive(&p.c_t, "Ct")?;
    require_non_negative(&p.c_c, "Cc")?;
    let mut capacitors = vec![
        cap("d", "1", &p.c_d),
        cap("1", "2", &p.c_q),
        cap("3", "4", &p.c_q),
        cap("1", GROUND, &p.c_g),
        cap("2", GROUND, &p.c_g),
        cap("3", GROUND, &p.c_g),
        cap("4", GROUND, &p.c_g),
        cap("t", GROUND, &p.c_t),
    ];
    if !p.c_c.is_zero() {
        capacitors.push(cap("1", "t", &p.c_c));
        capacitors.push(cap("t", "3", &p.c_c));
    }
    let netlist = Netlist::new(
        names(&["d", "1", "2", "t", "3", "4"]),
        capacitors,
        vec![
            junction("1", "2", "1m", "1p"),
            grounded_junction("t"),
            junction("3", "4", "2m", "2p"),
        ],
        vec![DrivePort {
            name: "d".to_owned(),
            source_node: "d".to_owned(),
        }],
    )?;
    let mut warnings = Vec::new();
    if p.c_c.is_zero() {
        warnings.push("bus coupling capacitance is zero; the qubits are decoupled".to_owned());
    }
    Ok(NetlistBuild { netlist, warnings })
}

/// Two floating qubits (islands 1,2 and 5,6) coupled through a floating bus
/// (islands 3,4). The bus junction is shunted by its internal capacitance
/// `c_t`, and each bus island carries `c_b` to ground. `c_c` joins island 1
/// to bus island 3 and bus island 4 to island 5.
#[derive(Debug, Clone)]
pub struct FloatingBusParams {
    pub c_d: Rational,
    pub c_q: Rational,
    pub c_g: Rational,
    pub c_c: Rational,
    pub c_t: Rational,
    pub c_b: Rational,
}

pub fn build_floating_bus(p: &FloatingBusParams) -> Result<NetlistBuild, NetlistError> {
    require_positive(&p.c_d, "Cd")?;
    require_positive(&p.c_q, "Cq")?;
    require_positive(&p.c_g, "Cg")?;
    require_positive(&p.c_t, "Ct")?;
    require_positive(&p.c_b, "Cb")?;
    require_non_negative(&p.c_c, "Cc")?;
    let mut capacitors = vec![
        cap("d", "1", &p.c_d),
        cap("1", "2", &p.c_q),
        cap("5", "6", &p.c_q),
        cap("3", "4", &p.c_t),
        cap("1", GROUND, &p.c_g),
        cap("2", GROUND, &p.c_g),
        cap("5", GROUND, &p.c_g),
        cap("6", GROUND, &p.c_g),
        cap("3", GROUND, &p.c_b),
        cap("4", GROUND, &p.c_b),
    ];
    if !p.c_c.is_zero() {
        capacitors.push(cap("1", "3", &p.c_c));
        capacitors.push(cap("4", "5", &p.c_c));
    }
    let netlist = Netlist::new(
        names(&["d", "1", "2", "3", "4", "5", "6"]),
        capacitors,
        vec![
            junction("1", "2", "1m", "1p"),
            junction("3", "4", "t", "tp"),
            junction("5", "6", "2m", "2p"),
        ],
        vec![DrivePort {
            name: "d".to_owned(),
            source_node: "d".to_owned(),
        }],
    )?;
    let mut warnings = Vec::new();
    if p.c_c.is_zero() {
        warnings.push("bus coupling capacitance is zero; the qubits are decoupled".to_owned());
    }
    Ok(NetlistBuild { netlist, warnings })
}

/// Which qubit island the drive line shares with the inter-qubit coupler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingSide {
    SameIsland,
    OppositeIsland,
}

impl CouplingSide {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingSide::SameIsland => "same",
            CouplingSide::OppositeIsland => "opposite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IslandSymmetry {
    Symmetric,
    Asymmetric,
}

/// A geometric layout of two direct-coupled floating qubits: island
/// asymmetry ratio `lambda`, coupling side, island capacitance `c_g`, and
/// the coupling-to-island capacitance ratio `r`. Realized as island caps
/// (c_g, lambda*c_g, c_g, lambda*c_g) with a single coupler `r*c_g` on the
/// chosen side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutPreset {
    symmetry: IslandSymmetry,
    side: CouplingSide,
    c_g: Rational,
    r: Rational,
    lambda: Rational,
}

impl LayoutPreset {
    pub fn new(
        symmetry: IslandSymmetry,
        side: CouplingSide,
        c_g: Rational,
        r: Rational,
        lambda: Rational,
    ) -> Result<Self, NetlistError> {
        if c_g <= Rational::zero() {
            return Err(NetlistError::InvalidPreset("island capacitance must be positive".into()));
        }
        if r < Rational::zero() {
            return Err(NetlistError::InvalidPreset("capacitance ratio r must be non-negative".into()));
        }
        if lambda < rat_int(1) {
            return Err(NetlistError::InvalidPreset("island asymmetry lambda must be >= 1".into()));
        }
        if symmetry == IslandSymmetry::Symmetric && lambda != rat_int(1) {
            return Err(NetlistError::InvalidPreset("symmetric layout requires lambda = 1".into()));
        }
        Ok(LayoutPreset {
            symmetry,
            side,
            c_g,
            r,
            lambda,
        })
    }

    pub fn symmetric(side: CouplingSide, c_g: Rational, r: Rational) -> Result<Self, NetlistError> {
        Self::new(IslandSymmetry::Symmetric, side, c_g, r, rat_int(1))
    }

    pub fn asymmetric(
        side: CouplingSide,
        c_g: Rational,
        r: Rational,
        lambda: Rational,
    ) -> Result<Self, NetlistError> {
        let symmetry = if lambda == rat_int(1) {
            IslandSymmetry::Symmetric
        } else {
            IslandSymmetry::Asymmetric
        };
        Self::new(symmetry, side, c_g, r, lambda)
    }

    pub fn symmetry(&self) -> IslandSymmetry {
        self.symmetry
    }

    pub fn side(&self) -> CouplingSide {
        self.side
    }

    pub fn island_cap(&self) -> &Rational {
        &self.c_g
    }

    pub fn ratio(&self) -> &Rational {
        &self.r
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    /// Coupling caps (c_c1, c_c2) realized by this layout.
    pub fn coupling_caps(&self) -> (Rational, Rational) {
        let c_c = &self.r * &self.c_g;
        match self.side {
            CouplingSide::SameIsland => (c_c, Rational::zero()),
            CouplingSide::OppositeIsland => (Rational::zero(), c_c),
        }
    }

    /// Island caps (c_g1, c_g2, c_g3, c_g4) realized by this layout.
    pub fn island_caps(&self) -> (Rational, Rational, Rational, Rational) {
        let big = &self.lambda * &self.c_g;
        (self.c_g.clone(), big.clone(), self.c_g.clone(), big)
    }
}

/// Shunt and drive capacitances shared by all layout presets.
#[derive(Debug, Clone)]
pub struct PresetBase {
    pub c_d: Rational,
    pub c_q: Rational,
}

pub fn from_preset(p: &LayoutPreset, base: &PresetBase) -> Result<NetlistBuild, NetlistError> {
    let (c_c1, c_c2) = p.coupling_caps();
    let (c_g1, c_g2, c_g3, c_g4) = p.island_caps();
    build_direct_coupled(&DirectCoupledParams {
        c_d: base.c_d.clone(),
        c_q: base.c_q.clone(),
        c_g1,
        c_g2,
        c_g3,
        c_g4,
        c_c1,
        c_c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::rat;

    fn direct_params() -> DirectCoupledParams {
        DirectCoupledParams {
            c_d: rat(1, 10),
            c_q: rat_int(70),
            c_g1: rat_int(50),
            c_g2: rat_int(50),
            c_g3: rat_int(50),
            c_g4: rat_int(50),
            c_c1: rat_int(6),
            c_c2: rat_int(2),
        }
    }

    #[test]
    fn direct_builder_produces_expected_shape() {
        let built = build_direct_coupled(&direct_params()).unwrap();
        let n = &built.netlist;
        assert_eq!(n.nodes(), &["d", "1", "2", "3", "4"]);
        assert_eq!(n.capacitors().len(), 9);
        assert_eq!(n.junctions().len(), 2);
        assert_eq!(n.drives().len(), 1);
        assert!(built.warnings.is_empty());
    }

    #[test]
    fn zero_couplings_are_omitted_structurally() {
        let mut p = direct_params();
        p.c_c2 = Rational::zero();
        let built = build_direct_coupled(&p).unwrap();
        assert_eq!(built.netlist.capacitors().len(), 8);
        assert!(!built
            .netlist
            .capacitors()
            .iter()
            .any(|c| c.node_a == "2" && c.node_b == "4"));

        p.c_c1 = Rational::zero();
        let built = build_direct_coupled(&p).unwrap();
        assert_eq!(built.netlist.capacitors().len(), 7);
        assert_eq!(built.warnings.len(), 1);
    }

    #[test]
    fn builders_reject_bad_parameters() {
        let mut p = direct_params();
        p.c_q = Rational::zero();
        assert!(matches!(
            build_direct_coupled(&p),
            Err(NetlistError::InvalidParameter { name: "Cq", .. })
        ));
        let mut p = direct_params();
        p.c_c1 = rat_int(-1);
        assert!(build_direct_coupled(&p).is_err());
    }

    #[test]
    fn netlist_invariants_are_enforced() {
        let nodes = names(&["a", "b"]);
        let good_cap = cap("a", GROUND, &rat_int(60));
        assert!(Netlist::new(nodes.clone(), vec![cap("a", "a", &rat_int(5))], vec![], vec![]).is_err());
        assert!(Netlist::new(
            nodes.clone(),
            vec![cap("a", "c", &rat_int(5))],
            vec![],
            vec![]
        )
        .is_err());
        assert!(Netlist::new(
            names(&["a", "a"]),
            vec![good_cap.clone()],
            vec![],
            vec![]
        )
        .is_err());
        // one junction per node
        let j = |a: &str, b: &str| Junction {
            node_a: a.into(),
            node_b: b.into(),
            josephson_energy_ghz: None,
            mode_labels: None,
        };
        assert!(matches!(
            Netlist::new(
                names(&["a", "b", "c"]),
                vec![cap("a", GROUND, &rat_int(1))],
                vec![j("a", "b"), j("b", "c")],
                vec![]
            ),
            Err(NetlistError::NodeInMultipleJunctions(_))
        ));
        // drive source may not sit on a junction and must couple somewhere
        assert!(matches!(
            Netlist::new(
                nodes.clone(),
                vec![good_cap.clone(), cap("b", GROUND, &rat_int(1))],
                vec![j("a", "b")],
                vec![DrivePort { name: "p".into(), source_node: "a".into() }]
            ),
            Err(NetlistError::DriveSourceHasJunction(_))
        ));
        assert!(matches!(
            Netlist::new(
                nodes,
                vec![good_cap],
                vec![],
                vec![DrivePort { name: "p".into(), source_node: "a".into() }]
            ),
            Err(NetlistError::DriveSourceNotCoupled(_))
        ));
    }

    #[test]
    fn coordinate_label_clashes_are_rejected() {
        // node named `1m` collides with the default minus label
        let result = Netlist::new(
            names(&["1m", "a", "b"]),
            vec![
                cap("a", GROUND, &rat_int(1)),
                cap("b", GROUND, &rat_int(1)),
                cap("1m", "a", &rat_int(1)),
            ],
            vec![Junction {
                node_a: "a".into(),
                node_b: "b".into(),
                josephson_energy_ghz: None,
                mode_labels: None,
            }],
            vec![],
        );
        assert!(matches!(result, Err(NetlistError::CoordinateLabelClash(_))));
    }

    #[test]
    fn preset_realizes_table_cells() {
        let p = LayoutPreset::symmetric(CouplingSide::SameIsland, rat_int(50), rat_int(1)).unwrap();
        let (c1, c2) = p.coupling_caps();
        assert_eq!(c1, rat_int(50));
        assert!(c2.is_zero());
        let (g1, g2, g3, g4) = p.island_caps();
        assert_eq!((g1, g2, g3, g4), (rat_int(50), rat_int(50), rat_int(50), rat_int(50)));

        let p = LayoutPreset::asymmetric(
            CouplingSide::OppositeIsland,
            rat_int(20),
            rat(1, 10),
            rat_int(10),
        )
        .unwrap();
        let (c1, c2) = p.coupling_caps();
        assert!(c1.is_zero());
        assert_eq!(c2, rat_int(2));
        let (g1, g2, _, _) = p.island_caps();
        assert_eq!(g1, rat_int(20));
        assert_eq!(g2, rat_int(200));
    }

    #[test]
    fn asymmetric_with_unit_lambda_equals_symmetric() {
        let a = LayoutPreset::asymmetric(CouplingSide::SameIsland, rat_int(50), rat(1, 2), rat_int(1)).unwrap();
        let s = LayoutPreset::symmetric(CouplingSide::SameIsland, rat_int(50), rat(1, 2)).unwrap();
        assert_eq!(a, s);
        let base = PresetBase {
            c_d: rat(1, 10),
            c_q: rat_int(70),
        };
        assert_eq!(
            from_preset(&a, &base).unwrap().netlist,
            from_preset(&s, &base).unwrap().netlist
        );
    }

    #[test]
    fn preset_validation() {
        assert!(LayoutPreset::new(
            IslandSymmetry::Symmetric,
            CouplingSide::SameIsland,
            rat_int(50),
            rat_int(1),
            rat_int(2)
        )
        .is_err());
        assert!(LayoutPreset::asymmetric(CouplingSide::SameIsland, rat_int(50), rat_int(1), rat(1, 2)).is_err());
        assert!(LayoutPreset::symmetric(CouplingSide::SameIsland, Rational::zero(), rat_int(1)).is_err());
    }
}
