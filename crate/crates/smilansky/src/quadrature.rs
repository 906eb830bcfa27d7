//! Gauss-Legendre quadrature on intervals and panel compositions.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre polynomial; accurate to ~1 ulp for
    /// n up to a few hundred.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi-style initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            let (_, d) = legendre_with_derivative(n, 0.0);
            nodes[n / 2] = 0.0;
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_a^b f(x) dx with this rule mapped onto [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Physical nodes and weights on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        (
            self.nodes.iter().map(|x| c + h * x).collect(),
            self.weights.iter().map(|w| w * h).collect(),
        )
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: the same Gauss-Legendre rule on each panel of a partition.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(breaks: &[f64], nodes_per_panel: usize) -> Self {
        assert!(breaks.len() >= 2);
        let gl = GaussLegendre::new(nodes_per_panel);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let (xs, ws) = gl.mapped(w[0], w[1]);
            nodes.extend(xs);
            weights.extend(ws);
        }
        PanelRule { nodes, weights }
    }

    /// Uniform partition of [a, b] into `panels` panels.
    pub fn uniform(a: f64, b: f64, panels: usize, nodes_per_panel: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::new(&breaks, nodes_per_panel)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Panel layout for circle integrals ∫_0^π resolving structure near x = 0
/// down to scale ~1/χ_max while staying cheap for smooth integrands.
pub fn circle_panels(nodes_per_panel: usize) -> PanelRule {
    PanelRule::new(
        &[0.0, 0.02, 0.08, 0.25, 0.7, 1.6, std::f64::consts::PI],
        nodes_per_panel,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_nodes_small_orders() {
        let gl = GaussLegendre::new(2);
        assert_relative_eq!(gl.nodes[1], 1.0 / 3.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gl.weights[0], 1.0, max_relative = 1e-14);
        let gl3 = GaussLegendre::new(3);
        assert_relative_eq!(gl3.nodes[2], (0.6f64).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gl3.weights[1], 8.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let gl = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = gl.integrate(0.0, 1.0, |x| x.powi(15));
        assert_relative_eq!(v, 1.0 / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn integrates_oscillatory() {
        let gl = GaussLegendre::new(64);
        let v = gl.integrate(0.0, std::f64::consts::PI, |x| (10.5 * x).sin());
        let exact = (1.0 - (10.5 * std::f64::consts::PI).cos()) / 10.5;
        assert_relative_eq!(v, exact, max_relative = 1e-12);
    }

    #[test]
    fn panels_resolve_boundary_layer() {
        // e^{-80 x} over [0, π]
        let rule = circle_panels(48);
        let v = rule.integrate(|x| (-80.0 * x).exp());
        let exact = (1.0 - (-80.0 * std::f64::consts::PI).exp()) / 80.0;
        assert_relative_eq!(v, exact, max_relative = 1e-12);
    }
}
