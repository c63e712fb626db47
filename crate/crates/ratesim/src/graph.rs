//! Decision graphs for (mode, rate) selection and graphical-unimodality
//! checks.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("edge ({0}, {1}) references an unknown or identical vertex")]
    BadEdge(usize, usize),
    #[error("vertex {0} out of range")]
    UnknownVertex(usize),
    #[error("reward vector length {got} does not match vertex count {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("tie at the maximum reward; graphical unimodality requires a unique optimum")]
    TiedMaximum,
    #[error("graph config: {0}")]
    Config(String),
}

/// A selectable (mode, rate) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub mode: u8,
    pub rate_index: usize,
    pub rate: f64,
}

/// Undirected decision graph. Vertices are indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGraph {
    vertices: Vec<Decision>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl DecisionGraph {
    pub fn new(vertices: Vec<Decision>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut canonical = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(GraphError::BadEdge(a, b));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if adjacency[lo].contains(&hi) {
                continue;
            }
            adjacency[lo].push(hi);
            adjacency[hi].push(lo);
            canonical.push((lo, hi));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        canonical.sort_unstable();
        Ok(Self { vertices, edges: canonical, adjacency })
    }

    /// Single-mode path graph over the given rates: the plain rate line.
    pub fn line(rates: &[f64]) -> Result<Self, GraphError> {
        if rates.is_empty() {
            return Err(GraphError::Empty);
        }
        let vertices = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| Decision { mode: 1, rate_index: i, rate: r })
            .collect();
        let edges = (0..rates.len().saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Self::new(vertices, edges)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, d: usize) -> Result<&Decision, GraphError> {
        self.vertices.get(d).ok_or(GraphError::UnknownVertex(d))
    }

    pub fn vertices(&self) -> &[Decision] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn rate(&self, d: usize) -> f64 {
        self.vertices[d].rate
    }

    /// Adjacency of `d`, excluding `d` itself.
    pub fn neighbors(&self, d: usize) -> Result<&[usize], GraphError> {
        self.adjacency.get(d).map(Vec::as_slice).ok_or(GraphError::UnknownVertex(d))
    }

    pub fn degree(&self, d: usize) -> usize {
        self.adjacency[d].len()
    }

    /// Maximum vertex degree.
    pub fn gamma(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True iff per-mode success probabilities are non-increasing in rate.
    pub fn check_correlated_modes(&self, theta: &[f64]) -> Result<bool, GraphError> {
        if theta.len() != self.len() {
            return Err(GraphError::LengthMismatch { got: theta.len(), want: self.len() });
        }
        let mut by_mode: Vec<(u8, usize)> = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            by_mode.push((v.mode, i));
        }
        by_mode.sort_by(|a, b| {
            (a.0, self.vertices[a.1].rate_index).cmp(&(b.0, self.vertices[b.1].rate_index))
        });
        Ok(by_mode.windows(2).all(|w| {
            w[0].0 != w[1].0 || theta[w[0].1] >= theta[w[1].1]
        }))
    }
}

/// Default two-mode 802.11n 40 MHz graph: single-stream and double-stream
/// modes, 8 rates each, line edges within a mode, and cross-mode edges only
/// in the mid-SNR overlap (upper half of SS paired with the lower half of
/// DS). The exact published topology is figure-only; this is a documented
/// reconstruction and every experiment accepts a user-supplied graph.
pub fn mimo_default_graph() -> DecisionGraph {
    let ss = [13.5, 27.0, 40.5, 54.0, 81.0, 108.0, 121.5, 135.0];
    let ds = [27.0, 54.0, 81.0, 108.0, 162.0, 216.0, 243.0, 270.0];
    let mut vertices = Vec::with_capacity(16);
    for (i, &r) in ss.iter().enumerate() {
        vertices.push(Decision { mode: 1, rate_index: i, rate: r });
    }
    for (i, &r) in ds.iter().enumerate() {
        vertices.push(Decision { mode: 2, rate_index: i, rate: r });
    }
    let mut edges = Vec::new();
    for i in 0..7 {
        edges.push((i, i + 1)); // SS line
        edges.push((8 + i, 8 + i + 1)); // DS line
    }
    for j in 0..4 {
        edges.push((4 + j, 8 + j)); // overlap region
    }
    DecisionGraph::new(vertices, edges).unwrap()
}

/// True iff every non-optimal vertex has a neighbor with strictly larger
/// reward. With a unique maximizer this is equivalent to requiring a
/// strictly ascending path from every vertex to the optimum.
pub fn check_graph_unimodal(graph: &DecisionGraph, mu: &[f64]) -> Result<bool, GraphError> {
    if mu.len() != graph.len() {
        return Err(GraphError::LengthMismatch { got: mu.len(), want: graph.len() });
    }
    let best = mu
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    if mu.iter().enumerate().any(|(i, &m)| i != best && m == mu[best]) {
        return Err(GraphError::TiedMaximum);
    }
    for d in 0..graph.len() {
        if d == best {
            continue;
        }
        if !graph.adjacency[d].iter().any(|&n| mu[n] > mu[d]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Brute-force oracle: search for a strictly ascending path from every
/// vertex to the argmax. Kept independent of [`check_graph_unimodal`].
pub fn ascending_path_oracle(graph: &DecisionGraph, mu: &[f64]) -> Result<bool, GraphError> {
    if mu.len() != graph.len() {
        return Err(GraphError::LengthMismatch { got: mu.len(), want: graph.len() });
    }
    let best = mu
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    if mu.iter().enumerate().any(|(i, &m)| i != best && m == mu[best]) {
        return Err(GraphError::TiedMaximum);
    }
    'outer: for start in 0..graph.len() {
        if start == best {
            continue;
        }
        // ascending reachability: BFS along strictly increasing mu
        let mut seen = vec![false; graph.len()];
        let mut queue = vec![start];
        seen[start] = true;
        while let Some(v) = queue.pop() {
            if v == best {
                continue 'outer;
            }
            for &w in &graph.adjacency[v] {
                if !seen[w] && mu[w] > mu[v] {
                    seen[w] = true;
                    queue.push(w);
                }
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Render a graph as the plain-text config: one `vertex=mode,rate` line per
/// vertex (in index order) and one `edge=i,j` line per edge.
pub fn render_graph(graph: &DecisionGraph) -> String {
    let mut out = String::new();
    for v in graph.vertices() {
        out.push_str(&format!("vertex={},{}\n", v.mode, v.rate));
    }
    for (a, b) in graph.edges() {
        out.push_str(&format!("edge={a},{b}\n"));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<DecisionGraph, GraphError> {
    let mut vertices: Vec<Decision> = Vec::new();
    let mut edges = Vec::new();
    let mut per_mode_count: std::collections::HashMap<u8, usize> = std::collections::HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| GraphError::Config(format!("line {}: missing `=`", ln + 1)))?;
        let parts: Vec<&str> = value.split(',').map(str::trim).collect();
        match (key.trim(), parts.as_slice()) {
            ("vertex", [mode, rate]) => {
                let mode: u8 = mode
                    .parse()
                    .map_err(|_| GraphError::Config(format!("bad mode `{mode}`")))?;
                let rate: f64 = rate
                    .parse()
                    .map_err(|_| GraphError::Config(format!("bad rate `{rate}`")))?;
                let idx = per_mode_count.entry(mode).or_insert(0);
                vertices.push(Decision { mode, rate_index: *idx, rate });
                *idx += 1;
            }
            ("edge", [a, b]) => {
                let a: usize =
                    a.parse().map_err(|_| GraphError::Config(format!("bad vertex `{a}`")))?;
                let b: usize =
                    b.parse().map_err(|_| GraphError::Config(format!("bad vertex `{b}`")))?;
                edges.push((a, b));
            }
            (other, _) => {
                return Err(GraphError::Config(format!("line {}: bad entry `{other}`", ln + 1)))
            }
        }
    }
    DecisionGraph::new(vertices, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_graph_shapes() {
        let g3 = DecisionGraph::line(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g3.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g3.gamma(), 2);
        let g1 = DecisionGraph::line(&[1.0]).unwrap();
        assert_eq!(g1.edges().len(), 0);
        assert_eq!(g1.gamma(), 0);
        let g2 = DecisionGraph::line(&[1.0, 2.0]).unwrap();
        assert_eq!(g2.gamma(), 1);
        let g8 = DecisionGraph::line(&[1., 2., 3., 4., 5., 6., 7., 8.]).unwrap();
        assert_eq!(g8.edges().len(), 7);
        assert_eq!(g8.gamma(), 2);
        assert!(DecisionGraph::line(&[]).is_err());
    }

    #[test]
    fn line_graph_neighbor_counts() {
        let g = DecisionGraph::line(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert_eq!(g.neighbors(3).unwrap(), &[2]);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
        assert!(g.neighbors(9).is_err());
    }

    #[test]
    fn mimo_graph_structure() {
        let g = mimo_default_graph();
        assert_eq!(g.len(), 16);
        // (SS, 13.5) is vertex 0; all its neighbors stay in SS mode
        for &n in g.neighbors(0).unwrap() {
            assert_eq!(g.vertex(n).unwrap().mode, 1);
        }
        let gamma = g.gamma();
        assert!(gamma >= 2);
        for d in 0..g.len() {
            assert!(g.degree(d) <= gamma);
        }
        assert!(g.is_connected());
        // degrees match the edge list
        let mut deg = vec![0usize; g.len()];
        for &(a, b) in g.edges() {
            deg[a] += 1;
            deg[b] += 1;
        }
        for d in 0..g.len() {
            assert_eq!(deg[d], g.degree(d));
        }
    }

    #[test]
    fn unimodality_examples() {
        let g = DecisionGraph::line(&[1.0, 2.0, 3.0]).unwrap();
        assert!(check_graph_unimodal(&g, &[1.0, 2.0, 3.0]).unwrap());
        // vertex 2 is a local max distinct from the global max at vertex 0
        assert!(!check_graph_unimodal(&g, &[3.0, 1.0, 2.0]).unwrap());
        assert!(!ascending_path_oracle(&g, &[3.0, 1.0, 2.0]).unwrap());
        assert_eq!(
            check_graph_unimodal(&g, &[2.0, 2.0, 1.0]).unwrap_err(),
            GraphError::TiedMaximum
        );
        let star = DecisionGraph::new(
            vec![
                Decision { mode: 1, rate_index: 0, rate: 1.0 },
                Decision { mode: 1, rate_index: 1, rate: 2.0 },
                Decision { mode: 1, rate_index: 2, rate: 3.0 },
                Decision { mode: 1, rate_index: 3, rate: 4.0 },
            ],
            vec![(0, 1), (0, 2), (0, 3)],
        )
        .unwrap();
        let mu = [5.0, 1.0, 2.0, 3.0];
        assert_eq!(
            check_graph_unimodal(&star, &mu).unwrap(),
            ascending_path_oracle(&star, &mu).unwrap()
        );
        // constant except the raised center: every leaf sits next to the peak
        let raised = [5.0, 1.0, 1.0, 1.0];
        assert!(check_graph_unimodal(&star, &raised).unwrap());
        assert!(ascending_path_oracle(&star, &raised).unwrap());
    }

    #[test]
    fn line_matches_scalar_unimodality() {
        use crate::env::{check_unimodal, RateTable};
        let rates = RateTable::dot11g();
        let g = DecisionGraph::line(rates.as_slice()).unwrap();
        let thetas = [
            crate::env::STEEP_THETA,
            crate::env::GRADUAL_THETA,
            crate::env::LOSSY_THETA,
        ];
        for theta in thetas {
            let mu: Vec<f64> =
                rates.as_slice().iter().zip(theta.iter()).map(|(r, t)| r * t).collect();
            assert_eq!(
                check_unimodal(&rates, &theta),
                check_graph_unimodal(&g, &mu).unwrap()
            );
        }
    }

    #[test]
    fn graph_config_round_trip() {
        let g = mimo_default_graph();
        let text = render_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(g, back);
        assert!(parse_graph("vertex=1,6\nedge=0,5\n").is_err());
        assert!(parse_graph("garbage\n").is_err());
    }
}
