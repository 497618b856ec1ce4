//! Built-in example frameworks in the plane.
//!
//! Vertices are labelled `A, B, C, ...` in index order. Every fixture uses
//! edge 0 as the free edge.

use crate::error::Result;
use crate::framework::{Configuration, Edge, Framework, Pin, Topology};
use crate::Real;

pub const NAMES: [&str; 3] = ["four-bar", "heptagon-1", "heptagon-2"];

/// Four-bar linkage `A B C D` with `|AB| = 1`, `|BC| = |DA| = 2` and free
/// edge `CD`.
///
/// `theta1` is the angle of `AD` and `phi` the angle of `BC`, both from the
/// `+x` axis; `A` sits at the origin and `B` at `(1, 0)`. Pins: both
/// coordinates of `A` and the `y` coordinate of `B`. The collinear states
/// `theta1 = phi = 0` and `theta1 = phi = π` are the index-1 saddles of
/// `|CD|^2` (with `|CD| = 1` there).
pub fn four_bar<T: Real>(theta1: f64, phi: f64) -> Result<Framework<T>> {
    let topo = Topology::new(
        4,
        vec![
            Edge::new(2, 3),
            Edge::new(0, 1),
            Edge::new(1, 2),
            Edge::new(3, 0),
        ],
        0,
    )?;
    let verts = [
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0 + 2.0 * phi.cos(), 2.0 * phi.sin()],
        [2.0 * theta1.cos(), 2.0 * theta1.sin()],
    ];
    let config = planar_config(&verts)?;
    let lengths = vec![
        T::lit(measured(&verts, 2, 3)),
        T::one(),
        T::lit(2.0),
        T::lit(2.0),
    ];
    let pins = vec![
        Pin::new(0, 0, T::zero()),
        Pin::new(0, 1, T::zero()),
        Pin::new(1, 1, T::zero()),
    ];
    Framework::new(topo, config, Some(lengths), pins)
}

/// The default four-bar start, `theta1 = 0.35`, `phi = 0.2`.
pub fn four_bar_default<T: Real>() -> Result<Framework<T>> {
    four_bar(0.35, 0.2)
}

/// Edges of the first heptagon: free `BF`, the 7-cycle, and chords `AC`, `DG`.
pub const HEPTAGON_1_EDGES: [(usize, usize); 10] = [
    (1, 5),
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 5),
    (5, 6),
    (6, 0),
    (0, 2),
    (3, 6),
];

/// Edges of the second heptagon: free `BF`, the 7-cycle, and chords `AE`, `CG`.
pub const HEPTAGON_2_EDGES: [(usize, usize); 10] = [
    (1, 5),
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 4),
    (4, 5),
    (5, 6),
    (6, 0),
    (0, 4),
    (2, 6),
];

/// Non-singular starting heptagon (two-decimal coordinates).
pub const HEPTAGON_1_START: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [-1.2, 1.34],
    [-1.11, 2.63],
    [0.39, 5.23],
    [2.56, 3.98],
    [3.62, 2.92],
    [1.0, 0.0],
];

/// A singular state of the first heptagon's topology (C, D, G collinear).
pub const HEPTAGON_1_SINGULAR: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [0.776635405826052, 1.62383418070239],
    [2.01192626375719, 2.02887306317142],
    [3.35090912329313, 4.71348195495975],
    [1.61101477589929, 2.91827509782407],
    [0.465391046208262, 3.88654482779027],
    [1.0, 0.0],
];

/// Non-singular state of the second heptagon, on the flex through its
/// singular state.
pub const HEPTAGON_2_START: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [-0.183477173692298, 1.79062450746489],
    [-0.388026772765720, 3.07443113679772],
    [1.61183892383709, 3.05125365739669],
    [2.59380885818236, 1.30891756810680],
    [3.57889482780143, 1.48098044167245],
    [1.0, 0.0],
];

pub const HEPTAGON_2_SINGULAR: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [-0.0291611389336360, 1.79976377004764],
    [-0.674484071819545, 2.92828417849913],
    [1.15521103685379, 2.12068538621620],
    [2.75549472728296, 0.921063733299569],
    [3.70391276750481, 1.23808616307659],
    [1.0, 0.0],
];

/// Heptagon with pins `x_A`, `y_A`, `y_G` and rest lengths measured from
/// `verts`.
pub fn heptagon<T: Real>(edges: &[(usize, usize)], verts: &[[f64; 2]; 7]) -> Result<Framework<T>> {
    let topo = Topology::new(7, edges.iter().map(|&(a, b)| Edge::new(a, b)).collect(), 0)?;
    let config = planar_config(verts)?;
    let pins = vec![
        Pin::new(0, 0, T::lit(verts[0][0])),
        Pin::new(0, 1, T::lit(verts[0][1])),
        Pin::new(6, 1, T::lit(verts[6][1])),
    ];
    Framework::new(topo, config, None, pins)
}

pub fn heptagon_1<T: Real>() -> Result<Framework<T>> {
    heptagon(&HEPTAGON_1_EDGES, &HEPTAGON_1_START)
}

pub fn heptagon_2<T: Real>() -> Result<Framework<T>> {
    heptagon(&HEPTAGON_2_EDGES, &HEPTAGON_2_START)
}

pub fn by_name<T: Real>(name: &str) -> Option<Result<Framework<T>>> {
    match name {
        "four-bar" => Some(four_bar_default()),
        "heptagon-1" => Some(heptagon_1()),
        "heptagon-2" => Some(heptagon_2()),
        _ => None,
    }
}

/// Label of vertex `i`: `A..Z`, then `V26`, `V27`, ...
pub fn vertex_label(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("V{i}")
    }
}

fn planar_config<T: Real>(verts: &[[f64; 2]]) -> Result<Configuration<T>> {
    let v: Vec<Vec<T>> = verts
        .iter()
        .map(|p| vec![T::lit(p[0]), T::lit(p[1])])
        .collect();
    Configuration::from_vertices(2, &v)
}

fn measured(verts: &[[f64; 2]], a: usize, b: usize) -> f64 {
    let dx = verts[a][0] - verts[b][0];
    let dy = verts[a][1] - verts[b][1];
    (dx * dx + dy * dy).sqrt()
}
