//! Essential r-connectedness audit: does the support of the measure on the
//! cube Q_α connect through Q_{2α} by hops shorter than r?

use std::collections::HashMap;

use crate::cluster::UnionFind;
use crate::error::CoxError;
use crate::geom::Point;

use super::field::{radius_field, FieldKind};
use super::{EnvData, EnvRealization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionStatus {
    /// Connectivity radii over Q_{2α} stayed below α/2.
    Held,
    Failed,
    /// The variant has no connectivity radius field; only the graph check ran.
    NotEvaluable,
}

#[derive(Debug, Clone)]
pub struct ConnectednessReport {
    pub precondition: PreconditionStatus,
    pub connected: bool,
    /// Hop sequence linking the two most separated support points of Q_α,
    /// present when connected and the support is nontrivial.
    pub witness_path: Option<Vec<Point>>,
    /// Two support points of Q_α in different components, when disconnected.
    pub failing_pair: Option<(Point, Point)>,
    pub node_count: usize,
}

/// Audit essential r-connectedness of the realization at scale α.
///
/// Support nodes: segment sets are discretized as polyline vertices at pitch
/// r/4; density grids contribute centers of cells with positive value; ball
/// sets contribute covered points of a pitch-r/4 lattice. Node pairs closer
/// than r are linked and every pair of nodes inside Q_α must end up in one
/// component, using nodes of Q_{2α} as stepping stones.
pub fn essential_connectedness_audit(
    env: &EnvRealization,
    r: f64,
    alpha: f64,
) -> Result<ConnectednessReport, CoxError> {
    if !(r > 0.0) || !(alpha > 0.0) {
        return Err(CoxError::InvalidParameter(format!(
            "r and alpha must be positive, got {r}, {alpha}"
        )));
    }
    let pad = env.window.padded_half_width();
    if alpha > pad + 1e-12 {
        return Err(CoxError::WindowTooSmall(format!(
            "Q_2alpha needs half-width {alpha}, padded window has {pad}"
        )));
    }
    let dim = env.window.dim;
    let outer = alpha; // Q_{2α} = [-α, α]^d
    let inner = alpha / 2.0; // Q_α = [-α/2, α/2]^d

    let precondition = match radius_field(env) {
        Ok(field) if field.kind == FieldKind::Connectivity => {
            let mut held = true;
            'outer: for p in lattice_points(dim, outer, r / 4.0) {
                if field.eval(&p, alpha) >= alpha / 2.0 {
                    held = false;
                    break 'outer;
                }
            }
            if held {
                PreconditionStatus::Held
            } else {
                PreconditionStatus::Failed
            }
        }
        _ => PreconditionStatus::NotEvaluable,
    };

    // Scalar environments have full support: trivially connected.
    if let EnvData::Scalar(z) = &env.data {
        return Ok(ConnectednessReport {
            precondition,
            connected: *z > 0.0,
            witness_path: None,
            failing_pair: None,
            node_count: 0,
        });
    }

    let nodes = support_nodes(env, outer, r / 4.0);
    let in_inner =
        |p: &Point| (0..dim).all(|a| p.coord(a).abs() <= inner + 1e-12);

    // hash nodes at pitch r so hops < r stay within the 3^d neighborhood
    let keyed: HashMap<(i64, i64, i64), Vec<usize>> = {
        let mut m: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in nodes.iter().enumerate() {
            m.entry(key_of(p, r)).or_default().push(i);
        }
        m
    };
    let neighbors = |i: usize| -> Vec<usize> {
        let k = key_of(&nodes[i], r);
        let mut out = Vec::new();
        let range = |on: bool| if on { -1..=1 } else { 0..=0 };
        for dz in range(dim > 2) {
            for dy in range(dim > 1) {
                for dx in -1..=1 {
                    if let Some(v) = keyed.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                        for &j in v {
                            if j != i && nodes[i].dist(&nodes[j]) < r {
                                out.push(j);
                            }
                        }
                    }
                }
            }
        }
        out
    };

    let mut uf = UnionFind::new(nodes.len());
    for i in 0..nodes.len() {
        for j in neighbors(i) {
            uf.union(i, j);
        }
    }

    let inner_nodes: Vec<usize> = (0..nodes.len()).filter(|&i| in_inner(&nodes[i])).collect();
    if inner_nodes.len() < 2 {
        return Ok(ConnectednessReport {
            precondition,
            connected: true,
            witness_path: None,
            failing_pair: None,
            node_count: nodes.len(),
        });
    }
    let root0 = uf.find(inner_nodes[0]);
    for &i in &inner_nodes[1..] {
        if uf.find(i) != root0 {
            return Ok(ConnectednessReport {
                precondition,
                connected: false,
                witness_path: None,
                failing_pair: Some((nodes[inner_nodes[0]], nodes[i])),
                node_count: nodes.len(),
            });
        }
    }

    // connected: exhibit a hop path between the two most separated Q_α nodes
    let (mut a, mut b, mut best) = (inner_nodes[0], inner_nodes[0], -1.0);
    for &i in &inner_nodes {
        for &j in &inner_nodes {
            let d = nodes[i].dist(&nodes[j]);
            if d > best {
                (a, b, best) = (i, j, d);
            }
        }
    }
    let witness_path = bfs_path(&nodes, a, b, &neighbors);
    Ok(ConnectednessReport {
        precondition,
        connected: true,
        witness_path,
        failing_pair: None,
        node_count: nodes.len(),
    })
}

fn key_of(p: &Point, pitch: f64) -> (i64, i64, i64) {
    (
        (p.coord(0) / pitch).floor() as i64,
        (p.coord(1) / pitch).floor() as i64,
        (p.coord(2) / pitch).floor() as i64,
    )
}

fn bfs_path(
    nodes: &[Point],
    from: usize,
    to: usize,
    neighbors: &dyn Fn(usize) -> Vec<usize>,
) -> Option<Vec<Point>> {
    let mut prev = vec![usize::MAX; nodes.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = from;
    while let Some(i) = queue.pop_front() {
        if i == to {
            let mut path = vec![nodes[to]];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(nodes[cur]);
            }
            path.reverse();
            return Some(path);
        }
        for j in neighbors(i) {
            if prev[j] == usize::MAX {
                prev[j] = i;
                queue.push_back(j);
            }
        }
    }
    None
}

/// All lattice points of pitch `step` in `[-half, half]^dim`.
fn lattice_points(dim: usize, half: f64, step: f64) -> Vec<Point> {
    let n = ((2.0 * half) / step).ceil() as usize + 1;
    let coord = |i: usize| (-half + i as f64 * step).min(half);
    let mut out = Vec::new();
    let mut idx = [0usize; 3];
    loop {
        let mut c = [0.0; 3];
        for a in 0..dim {
            c[a] = coord(idx[a]);
        }
        out.push(Point::new(&c[..dim]));
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == dim {
                return out;
            }
        }
    }
}

/// Discretized support of the measure inside `[-half, half]^dim`.
fn support_nodes(env: &EnvRealization, half: f64, pitch: f64) -> Vec<Point> {
    let dim = env.window.dim;
    let inside = |p: &Point| (0..dim).all(|a| p.coord(a).abs() <= half + 1e-12);
    match &env.data {
        EnvData::Scalar(_) => unreachable!("handled by caller"),
        EnvData::Grid(grid) => {
            let lo = vec![-half; dim];
            let hi = vec![half; dim];
            // stride cells so node spacing is about the polyline pitch; with
            // coarse grids every positive cell center is a node
            let k = ((pitch / grid.cell_size).floor() as usize).max(1);
            let n = grid.cells_per_axis;
            let mut out = Vec::new();
            for idx in grid.cells_in_box(&lo, &hi) {
                let on_stride = (0..dim).all(|a| (idx / n.pow(a as u32)) % n % k == 0);
                if on_stride && grid.values[idx] > 0.0 {
                    let (clo, chi) = grid.cell_bounds(idx);
                    let mut c = [0.0; 3];
                    for a in 0..dim {
                        c[a] = 0.5 * (clo[a] + chi[a]);
                    }
                    let p = Point::new(&c[..dim]);
                    if inside(&p) {
                        out.push(p);
                    }
                }
            }
            out
        }
        EnvData::Segments(set) => {
            let mut out = Vec::new();
            for (a, b) in &set.segments {
                let len = a.dist(b);
                let steps = (len / pitch).ceil().max(1.0) as usize;
                for k in 0..=steps {
                    let t = k as f64 / steps as f64;
                    let mut c = [0.0; 3];
                    for ax in 0..dim {
                        c[ax] = a.coord(ax) + t * (b.coord(ax) - a.coord(ax));
                    }
                    let p = Point::new(&c[..dim]);
                    if inside(&p) {
                        out.push(p);
                    }
                }
            }
            out
        }
        EnvData::Balls(set) => lattice_points(dim, half, pitch)
            .into_iter()
            .filter(|p| {
                set.centers
                    .iter()
                    .zip(&set.radii)
                    .any(|(c, &r)| c.dist(p) < r)
            })
            .collect(),
    }
}
