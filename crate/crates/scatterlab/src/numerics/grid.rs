//! Discretizations of `[0, r_max]` (3D radial work) and of a symmetric
//! interval of the line (1D evolution and the ρ-line of the convolution
//! algebra).

use std::sync::Arc;

use serde::Serialize;

/// Uniform midpoint grid on `[0, r_max]` with quadrature weights for
/// `∫₀^{r_max} · dr`.
///
/// Nodes sit at `r_i = (i + 1/2) h` with `h = r_max / n`, so `r_1 > 0`
/// (kernels with `1/r` factors stay finite) and the weights sum to `r_max`
/// exactly. The midpoint rule is exact on linear integrands.
#[derive(Debug, Clone, Serialize)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    #[serde(skip)]
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Arc<Self> {
        assert!(r_max > 0.0 && n >= 1, "degenerate radial grid");
        let h = r_max / n as f64;
        let nodes = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        Arc::new(Self { r_max, n, nodes })
    }

    /// Default resolution for resolvent work.
    pub fn default_resolvent() -> Arc<Self> {
        Self::new(60.0, 2048)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Quadrature weight of node `i` (uniform for the midpoint rule).
    pub fn weight(&self, _i: usize) -> f64 {
        self.spacing()
    }

    /// `∫₀^{r_max} f dr` for sampled values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        f.iter().sum::<f64>() * self.spacing()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && (self.r_max - other.r_max).abs() < 1e-12 * self.r_max
    }
}

/// Uniform symmetric grid on the line with an odd number of nodes, so that
/// 0 itself is a node and the node set is mirror-symmetric.
///
/// Nodes are `x_k = k h` for `k = -(n-1)/2 .. (n-1)/2`; each node carries the
/// cell `[x_k - h/2, x_k + h/2)`, so `n·h` is the total covered length and
/// `half_width = n·h/2`.
#[derive(Debug, Clone, Serialize)]
pub struct LineGrid {
    n: usize,
    h: f64,
}

impl LineGrid {
    pub fn new(half_width: f64, n: usize) -> Arc<Self> {
        assert!(n % 2 == 1, "line grid needs an odd node count");
        assert!(half_width > 0.0);
        Arc::new(Self {
            n,
            h: 2.0 * half_width / n as f64,
        })
    }

    /// Grid with prescribed spacing, covering at least `[-half_width, half_width]`.
    pub fn with_spacing(half_width: f64, h: f64) -> Arc<Self> {
        assert!(h > 0.0 && half_width > h);
        let mut n = (2.0 * half_width / h).ceil() as usize;
        if n % 2 == 0 {
            n += 1;
        }
        Arc::new(Self { n, h })
    }

    /// Integer lattice `{-m..m}·h` (n = 2m+1 nodes at exactly this spacing).
    pub fn lattice(m_half: usize, h: f64) -> Arc<Self> {
        assert!(h > 0.0);
        Arc::new(Self {
            n: 2 * m_half + 1,
            h,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.n as f64 * self.h
    }

    /// Signed lattice index of node `i` (0 maps to the centre).
    pub fn index_offset(&self) -> i64 {
        (self.n as i64 - 1) / 2
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as i64 - self.index_offset()) as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && (self.h - other.h).abs() < 1e-14 * self.h
    }
}
