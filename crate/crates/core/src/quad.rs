//! Gauss–Legendre rules, Lagrange panel operators and adaptive
//! Gauss–Kronrod integration.

use crate::error::{LabError, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Operators of the degree-`n-1` interpolant through `n` Gauss–Legendre
/// nodes mapped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    /// Nodes in `[0, 1]`.
    pub nodes: Vec<f64>,
    /// Weights summing to one.
    pub weights: Vec<f64>,
    /// `integrate[i][j] = int_0^{nodes[i]} l_j(s) ds`.
    pub integrate: Vec<Vec<f64>>,
    /// `differentiate[i][j] = l_j'(nodes[i])`.
    pub differentiate: Vec<Vec<f64>>,
}

impl PanelRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let nodes: Vec<f64> = x.iter().map(|v| 0.5 * (v + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|v| 0.5 * v).collect();
        let mut integrate = vec![vec![0.0; n]; n];
        for i in 0..n {
            // n-point GL on [0, nodes[i]] is exact for degree n-1
            for (xk, wk) in nodes.iter().zip(&weights) {
                let s = xk * nodes[i];
                for (j, out) in integrate[i].iter_mut().enumerate() {
                    *out += wk * nodes[i] * lagrange(&nodes, j, s);
                }
            }
        }
        let mut differentiate = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                differentiate[i][j] = lagrange_derivative(&nodes, j, nodes[i]);
            }
        }
        Self {
            nodes,
            weights,
            integrate,
            differentiate,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values at `s in [0, 1]`.
    pub fn basis(&self, s: f64) -> Vec<f64> {
        (0..self.nodes.len())
            .map(|j| lagrange(&self.nodes, j, s))
            .collect()
    }
}

fn lagrange(nodes: &[f64], j: usize, s: f64) -> f64 {
    let mut v = 1.0;
    for (m, xm) in nodes.iter().enumerate() {
        if m != j {
            v *= (s - xm) / (nodes[j] - xm);
        }
    }
    v
}

fn lagrange_derivative(nodes: &[f64], j: usize, s: f64) -> f64 {
    let mut total = 0.0;
    for (k, xk) in nodes.iter().enumerate() {
        if k == j {
            continue;
        }
        let mut term = 1.0 / (nodes[j] - xk);
        for (m, xm) in nodes.iter().enumerate() {
            if m != j && m != k {
                term *= (s - xm) / (nodes[j] - xm);
            }
        }
        total += term;
    }
    total
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Values that the adaptive rules can integrate.
pub trait Integrand:
    Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for num_complex::Complex64 {
    fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<T: Integrand>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk = rk + s * WGK[j];
        if j % 2 == 1 {
            rg = rg + s * WG[j / 2];
        }
    }
    (rk * h, ((rk - rg) * h).magnitude())
}

/// Globally adaptive bisection on `[a, b]` until the summed error estimate
/// falls below `max(abs_tol, rel_tol |I|)`.
pub fn integrate_adaptive<T: Integrand>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<(T, f64)> {
    if a == b {
        return Ok((T::zero(), 0.0));
    }
    let mut panels = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total = panels.iter().fold(T::zero(), |s, p| s + p.2);
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let tol = abs_tol.max(rel_tol * total.magnitude());
        if err <= tol {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(LabError::Quadrature {
                estimate: err,
                tolerance: tol,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, mid);
        let (v2, e2) = gk15(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Composite Simpson rule with `2 m` intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let n = 2 * m.max(1);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Composite Simpson rule for complex integrands.
pub fn simpson_c(f: impl Fn(f64) -> num_complex::Complex64, a: f64, b: f64, m: usize) -> num_complex::Complex64 {
    let n = 2 * m.max(1);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panel_operators() {
        let rule = PanelRule::new(8);
        // p(s) = s^5: integral s^6/6, derivative 5 s^4
        let vals: Vec<f64> = rule.nodes.iter().map(|s| s.powi(5)).collect();
        for i in 0..8 {
            let si = rule.nodes[i];
            let int: f64 = (0..8).map(|j| rule.integrate[i][j] * vals[j]).sum();
            let der: f64 = (0..8).map(|j| rule.differentiate[i][j] * vals[j]).sum();
            assert!((int - si.powi(6) / 6.0).abs() < 1e-13);
            assert!((der - 5.0 * si.powi(4)).abs() < 1e-11);
        }
        let b = rule.basis(0.3);
        let interp: f64 = b.iter().zip(&vals).map(|(b, v)| b * v).sum();
        assert!((interp - 0.3f64.powi(5)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peak() {
        let (v, _) =
            integrate_adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 1e-10, 1000).unwrap();
        let a = 1e-2f64;
        let exact = 2.0 * (1.0 / a).atan() / a;
        assert!((v - exact).abs() / exact < 1e-9, "{v} vs {exact}");
    }
}
