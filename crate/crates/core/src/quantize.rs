//! Capacitance-matrix assembly, plus/minus mode transformation, free-mode
//! classification, and elimination down to the reduced capacitance matrix.
//!
//! The pipeline is `assemble` -> `build_modes` -> `transform` -> `reduce`.
//! Every step is exact; `analyze` runs the whole chain.

use crate::netlist::Netlist;
use crate::ratmat::{Matrix, MatrixError, Rational};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantizeError {
    #[error("floating subcircuit: {}", .nodes.join(", "))]
    FloatingSubcircuit { nodes: Vec<String> },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// How a transformed coordinate enters the circuit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateKind {
    /// Voltage-source node; carries no potential term but is always kept.
    Drive,
    /// Island difference of a floating junction; a qubit-like mode.
    QubitMinus,
    /// Island sum of a floating junction; no potential term, eliminated.
    FreePlus,
    /// A node retained as itself: grounded-junction device or passive node.
    GroundedNode,
}

impl CoordinateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoordinateKind::Drive => "drive",
            CoordinateKind::QubitMinus => "qubit-minus",
            CoordinateKind::FreePlus => "free-plus",
            CoordinateKind::GroundedNode => "grounded-node",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinate {
    pub label: String,
    pub kind: CoordinateKind,
}

/// The coordinate change from node fluxes to device modes: one plus/minus
/// pair per floating junction, identity elsewhere. The matrix is symmetric
/// and involutive up to block scaling, and its labels name the new
/// coordinates in node-slot order.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    transform: Matrix,
    coordinates: Vec<Coordinate>,
    diagnostics: Vec<String>,
}

impl ModeSystem {
    pub fn transform_matrix(&self) -> &Matrix {
        &self.transform
    }

    pub fn coordinates(&self) -> &[Coordinate] {
        &self.coordinates
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn free_labels(&self) -> Vec<&str> {
        self.coordinates
            .iter()
            .filter(|c| c.kind == CoordinateKind::FreePlus)
            .map(|c| c.label.as_str())
            .collect()
    }

    pub fn retained(&self) -> Vec<&Coordinate> {
        self.coordinates
            .iter()
            .filter(|c| c.kind != CoordinateKind::FreePlus)
            .collect()
    }
}

/// The reduced capacitance matrix over retained coordinates, along with the
/// eliminated labels and the full transformed matrix it came from.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    c_r: Matrix,
    retained: Vec<Coordinate>,
    removed: Vec<String>,
    full: Matrix,
}

impl ReducedSystem {
    pub fn matrix(&self) -> &Matrix {
        &self.c_r
    }

    pub fn retained(&self) -> &[Coordinate] {
        &self.retained
    }

    pub fn removed(&self) -> &[String] {
        &self.removed
    }

    pub fn full_transformed(&self) -> &Matrix {
        &self.full
    }

    pub fn coordinate(&self, label: &str) -> Option<&Coordinate> {
        self.retained.iter().find(|c| c.label == label)
    }
}

/// Assemble the Maxwell capacitance matrix over all non-ground nodes:
/// diagonal entries sum every capacitance incident on the node (including
/// to ground), off-diagonal entries are minus the total capacitance between
/// the node pair.
pub fn assemble(netlist: &Netlist) -> Matrix {
    let nodes = netlist.nodes();
    let dim = nodes.len();
    let index = |id: &str| nodes.iter().position(|n| n == id);
    let mut entries = vec![Rational::zero(); dim * dim];
    for c in netlist.capacitors() {
        let a = index(&c.node_a);
        let b = index(&c.node_b);
        match (a, b) {
            (Some(i), Some(j)) => {
                entries[i * dim + i] += &c.value_ff;
                entries[j * dim + j] += &c.value_ff;
                entries[i * dim + j] -= &c.value_ff;
                entries[j * dim + i] -= &c.value_ff;
            }
            (Some(i), None) | (None, Some(i)) => {
                entries[i * dim + i] += &c.value_ff;
            }
            (None, None) => unreachable!("validated netlist"),
        }
    }
    Matrix::from_raw_symmetric(nodes.to_vec(), entries)
}

/// Build the mode transformation and classify every coordinate. Floating
/// junctions produce a free plus mode and a qubit minus mode in the slots of
/// their two islands; all other nodes map to themselves.
pub fn build_modes(netlist: &Netlist) -> ModeSystem {
    let nodes = netlist.nodes();
    let dim = nodes.len();
    let slot = |id: &str| nodes.iter().position(|n| n == id).expect("declared node");
    let mut entries = vec![Rational::zero(); dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = Rational::one();
    }
    let mut coordinates: Vec<Option<Coordinate>> = vec![None; dim];
    let mut diagnostics = Vec::new();
    for (junction, (minus, plus)) in netlist.junction_mode_labels() {
        let ia = slot(&junction.node_a);
        let ib = slot(&junction.node_b);
        entries[ia * dim + ia] = Rational::one();
        entries[ia * dim + ib] = Rational::one();
        entries[ib * dim + ia] = Rational::one();
        entries[ib * dim + ib] = -Rational::one();
        coordinates[ia] = Some(Coordinate {
            label: plus.clone(),
            kind: CoordinateKind::FreePlus,
        });
        coordinates[ib] = Some(Coordinate {
            label: minus.clone(),
            kind: CoordinateKind::QubitMinus,
        });
    }
    for (i, node) in nodes.iter().enumerate() {
        if coordinates[i].is_some() {
            continue;
        }
        let kind = if netlist.is_drive_source(node) {
            CoordinateKind::Drive
        } else {
            if netlist.junction_of(node).is_none() {
                diagnostics.push(format!(
                    "node `{node}` has no junction and no drive; retained as a passive coordinate"
                ));
            }
            CoordinateKind::GroundedNode
        };
        coordinates[i] = Some(Coordinate {
            label: node.clone(),
            kind,
        });
    }
    let coordinates: Vec<Coordinate> = coordinates.into_iter().map(Option::unwrap).collect();
    let labels = coordinates.iter().map(|c| c.label.clone()).collect();
    ModeSystem {
        transform: Matrix::from_raw_symmetric(labels, entries),
        coordinates,
        diagnostics,
    }
}

/// Transform the node-basis matrix into mode coordinates.
pub fn transform(c_prime: &Matrix, modes: &ModeSystem) -> Result<Matrix, QuantizeError> {
    Ok(c_prime.congruence(modes.transform_matrix())?)
}

fn retained_order<'a>(netlist: &Netlist, modes: &'a ModeSystem) -> Vec<&'a str> {
    let retained = modes.retained();
    let mut order: Vec<&str> = Vec::with_capacity(retained.len());
    for drive in netlist.drives() {
        let label = drive.source_node.as_str();
        if retained.iter().any(|c| c.label == label) && !order.contains(&label) {
            order.push(
                retained
                    .iter()
                    .find(|c| c.label == label)
                    .map(|c| c.label.as_str())
                    .unwrap(),
            );
        }
    }
    for c in &retained {
        if !order.contains(&c.label.as_str()) {
            order.push(c.label.as_str());
        }
    }
    order
}

fn reduced_from(
    c_r: Matrix,
    modes: &ModeSystem,
    full: &Matrix,
) -> ReducedSystem {
    let retained = c_r
        .labels()
        .iter()
        .map(|label| {
            modes
                .coordinates()
                .iter()
                .find(|c| &c.label == label)
                .expect("retained coordinate")
                .clone()
        })
        .collect();
    ReducedSystem {
        c_r,
        retained,
        removed: modes.free_labels().iter().map(|s| (*s).to_owned()).collect(),
        full: full.clone(),
    }
}

/// Eliminate the free modes by taking the Schur complement of the
/// transformed matrix onto the retained coordinates. Retained order is
/// drive coordinates first (port declaration order), then the remaining
/// coordinates in slot order.
///
/// Debug builds also run the inverse-restrict-inverse route and assert the
/// two agree exactly.
pub fn reduce(
    netlist: &Netlist,
    c: &Matrix,
    modes: &ModeSystem,
) -> Result<ReducedSystem, QuantizeError> {
    let keep = retained_order(netlist, modes);
    let c_r = c.schur_complement(&keep)?.permute(&keep)?;
    #[cfg(debug_assertions)]
    {
        let other = reduce_via_full_inverse(netlist, c, modes)?;
        assert_eq!(
            c_r,
            other.c_r,
            "free-mode elimination routes disagree"
        );
    }
    Ok(reduced_from(c_r, modes, c))
}

/// Reference route for free-mode elimination: invert the full matrix,
/// restrict the inverse to the retained coordinates, and invert back.
/// Algebraically identical to the Schur complement; kept as an independent
/// implementation for verification.
pub fn reduce_via_full_inverse(
    netlist: &Netlist,
    c: &Matrix,
    modes: &ModeSystem,
) -> Result<ReducedSystem, QuantizeError> {
    let keep = retained_order(netlist, modes);
    let c_r = c
        .invert()?
        .submatrix(&keep)?
        .invert()?
        .permute(&keep)?;
    Ok(reduced_from(c_r, modes, c))
}

/// Capacitor-connected components with no capacitance to ground. Such a
/// component makes the Maxwell matrix singular.
pub fn floating_subcircuits(netlist: &Netlist) -> Vec<Vec<String>> {
    let nodes = netlist.nodes();
    let dim = nodes.len();
    let index = |id: &str| nodes.iter().position(|n| n == id);
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut grounded = vec![false; dim];
    for c in netlist.capacitors() {
        match (index(&c.node_a), index(&c.node_b)) {
            (Some(i), Some(j)) => {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
            (Some(i), None) | (None, Some(i)) => grounded[i] = true,
            (None, None) => {}
        }
    }
    let mut component_grounded = vec![false; dim];
    for i in 0..dim {
        if grounded[i] {
            let root = find(&mut parent, i);
            component_grounded[root] = true;
        }
    }
    let mut components: Vec<Vec<String>> = Vec::new();
    for root in 0..dim {
        if find(&mut parent, root) != root || component_grounded[root] {
            continue;
        }
        let members: Vec<String> = (0..dim)
            .filter(|&i| find(&mut parent, i) == root)
            .map(|i| nodes[i].clone())
            .collect();
        components.push(members);
    }
    components
}

/// Full pipeline output for one netlist.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub maxwell: Matrix,
    pub modes: ModeSystem,
    pub transformed: Matrix,
    pub reduced: ReducedSystem,
}

/// Run assemble, build_modes, transform, and reduce, with a structural
/// pre-check that names any floating subcircuit before inversion fails.
pub fn analyze(netlist: &Netlist) -> Result<Analysis, QuantizeError> {
    let floating = floating_subcircuits(netlist);
    if let Some(nodes) = floating.into_iter().next() {
        return Err(QuantizeError::FloatingSubcircuit { nodes });
    }
    let maxwell = assemble(netlist);
    let modes = build_modes(netlist);
    let transformed = transform(&maxwell, &modes)?;
    let reduced = reduce(netlist, &transformed, &modes)?;
    Ok(Analysis {
        maxwell,
        modes,
        transformed,
        reduced,
    })
}
