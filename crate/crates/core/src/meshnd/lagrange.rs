//! Lagrange elements of degree `k` on simplices in barycentric coordinates.

/// Degree-`k` Lagrange element on the `dim`-simplex.
///
/// Nodes are `alpha / k` for multi-indices `|alpha| = k`; the basis function
/// of node `alpha` is `prod_i prod_{m < alpha_i} (k l_i - m) / (m + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeElement {
    pub dim: usize,
    pub degree: usize,
    /// Multi-indices, each of length `dim + 1`.
    pub nodes: Vec<Vec<usize>>,
}

impl LagrangeElement {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut nodes = Vec::new();
        let mut alpha = vec![0; dim + 1];
        fill(&mut alpha, 0, degree, &mut nodes);
        LagrangeElement { dim, degree, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Barycentric coordinates of node `i`.
    pub fn node_bary(&self, i: usize) -> [f64; 3] {
        let mut b = [0.0; 3];
        for (j, a) in self.nodes[i].iter().enumerate() {
            b[j] = *a as f64 / self.degree as f64;
        }
        b
    }

    /// All basis values at barycentric point `l`.
    pub fn values(&self, l: &[f64; 3]) -> Vec<f64> {
        let k = self.degree as f64;
        self.nodes
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(i, ai)| {
                        (0..*ai)
                            .map(|m| (k * l[i] - m as f64) / (m + 1) as f64)
                            .product::<f64>()
                    })
                    .product()
            })
            .collect()
    }
}

fn fill(alpha: &mut Vec<usize>, pos: usize, rest: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == alpha.len() {
        alpha[pos] = rest;
        out.push(alpha.clone());
        return;
    }
    for a in (0..=rest).rev() {
        alpha[pos] = a;
        fill(alpha, pos + 1, rest - a, out);
    }
}
