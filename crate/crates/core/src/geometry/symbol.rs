use super::polytope::{MomentPolytope, PolytopeKind};
use super::subvariety::AffineMap;

/// Closed-form reference potentials `u₀` whose gradient image is the interior
/// of the matching moment polytope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    /// `a·log(1 + eᵗ)` on `[0, a]`.
    FubiniStudy { a: f64 },
    /// `a·log(1 + e^{t₁}) + b·log(1 + e^{t₂})` on `[0,a]×[0,b]`.
    Product { a: f64, b: f64 },
    /// `a·log(1 + e^{t₁} + e^{t₂})` on the simplex of scale `a`.
    Simplex { a: f64 },
}

impl ReferenceKind {
    pub fn for_polytope(p: &MomentPolytope) -> Self {
        let (a, b) = p.params();
        match p.kind() {
            PolytopeKind::Interval { .. } => ReferenceKind::FubiniStudy { a },
            PolytopeKind::Rectangle { .. } => ReferenceKind::Product { a, b },
            PolytopeKind::Simplex { .. } => ReferenceKind::Simplex { a },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ReferenceKind::FubiniStudy { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceKind::FubiniStudy { .. } => "fubini_study",
            ReferenceKind::Product { .. } => "product",
            ReferenceKind::Simplex { .. } => "simplex",
        }
    }

    fn terms(&self) -> Vec<LseTerm> {
        let e0 = [0.0, 0.0];
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        match *self {
            ReferenceKind::FubiniStudy { a } => vec![LseTerm::new(a, &[e0, e1])],
            ReferenceKind::Product { a, b } => {
                vec![LseTerm::new(a, &[e0, e1]), LseTerm::new(b, &[e0, e2])]
            }
            ReferenceKind::Simplex { a } => vec![LseTerm::new(a, &[e0, e1, e2])],
        }
    }
}

/// `c · log Σ_j exp(⟨v_j, x⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LseTerm {
    pub coef: f64,
    pub slopes: Vec<[f64; 2]>,
}

impl LseTerm {
    fn new(coef: f64, slopes: &[[f64; 2]]) -> Self {
        Self {
            coef,
            slopes: slopes.to_vec(),
        }
    }

    /// Value, gradient and Hessian in one pass, with a max-shifted softmax.
    fn jet(&self, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let dots: Vec<f64> = self
            .slopes
            .iter()
            .map(|v| v[0] * x[0] + v[1] * x[1])
            .collect();
        let top = dots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = dots.iter().map(|d| (d - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let mut mean = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for (v, wi) in self.slopes.iter().zip(&w) {
            let p = wi / z;
            for i in 0..2 {
                mean[i] += p * v[i];
                for j in 0..2 {
                    second[i][j] += p * v[i] * v[j];
                }
            }
        }
        let mut hess = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hess[i][j] = self.coef * (second[i][j] - mean[i] * mean[j]);
            }
        }
        (
            self.coef * (top + z.ln()),
            [self.coef * mean[0], self.coef * mean[1]],
            hess,
        )
    }
}

/// Gaussian bump `amplitude · exp(-|x - center|² / width²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: f64,
}

/// The smooth deviation `g` added to the reference potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    Zero,
    Bumps(Vec<Bump>),
    /// `amount · Σ tanh(x_i)`: bounded, so the class is unchanged.
    Tilt { amount: f64 },
    /// `⟨c, x⟩`. Unbounded; only for probing the discrete operators.
    Affine { coef: [f64; 2] },
    /// `c·|x|²/2`. Unbounded; only for probing the discrete operators.
    Quadratic { coef: f64 },
}

impl Perturbation {
    fn jet(&self, x: [f64; 2], dim: usize) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let mut val = 0.0;
        let mut grad = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        match self {
            Perturbation::Zero => {}
            Perturbation::Bumps(bumps) => {
                for b in bumps {
                    let d = [x[0] - b.center[0], x[1] - b.center[1]];
                    let w2 = b.width * b.width;
                    let r2: f64 = (0..dim).map(|i| d[i] * d[i]).sum();
                    let g = b.amplitude * (-r2 / w2).exp();
                    val += g;
                    for i in 0..dim {
                        grad[i] -= 2.0 * d[i] / w2 * g;
                        for j in 0..dim {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            hess[i][j] += g * (4.0 * d[i] * d[j] / (w2 * w2) - 2.0 * delta / w2);
                        }
                    }
                }
            }
            Perturbation::Tilt { amount } => {
                for i in 0..dim {
                    let th = x[i].tanh();
                    let sech2 = 1.0 - th * th;
                    val += amount * th;
                    grad[i] += amount * sech2;
                    hess[i][i] -= 2.0 * amount * th * sech2;
                }
            }
            Perturbation::Affine { coef } => {
                for i in 0..dim {
                    val += coef[i] * x[i];
                    grad[i] += coef[i];
                }
            }
            Perturbation::Quadratic { coef } => {
                for i in 0..dim {
                    val += 0.5 * coef * x[i] * x[i];
                    grad[i] += coef * x[i];
                    hess[i][i] += coef;
                }
            }
        }
        (val, grad, hess)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Perturbation::Zero => true,
            Perturbation::Bumps(b) => b.iter().all(|b| b.amplitude == 0.0),
            Perturbation::Tilt { amount } => *amount == 0.0,
            Perturbation::Affine { coef } => coef[0] == 0.0 && coef[1] == 0.0,
            Perturbation::Quadratic { coef } => *coef == 0.0,
        }
    }
}

/// A torus-invariant weight written as a function of log coordinates:
/// `u = factor·(u₀ + g) + shift`, possibly pulled back along an affine
/// parametrization of a subvariety.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSymbol {
    reference: ReferenceKind,
    terms: Vec<LseTerm>,
    perturbation: Perturbation,
    factor: f64,
    shift: f64,
    dim: usize,
    embed: AffineMap,
    halfwidth: f64,
}

/// Value, gradient and Hessian at one point; unused components are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl WeightSymbol {
    pub fn new(reference: ReferenceKind, perturbation: Perturbation, halfwidth: f64) -> Self {
        let dim = reference.dim();
        Self {
            reference,
            terms: reference.terms(),
            perturbation,
            factor: 1.0,
            shift: 0.0,
            dim,
            embed: AffineMap::IDENTITY,
            halfwidth,
        }
    }

    /// Reference symbol of `polytope` with perturbation `g`.
    pub fn for_polytope(polytope: &MomentPolytope, g: Perturbation, halfwidth: f64) -> Self {
        Self::new(ReferenceKind::for_polytope(polytope), g, halfwidth)
    }

    pub fn reference(&self) -> ReferenceKind {
        self.reference
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// Number of log coordinates the symbol is a function of.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn embedding(&self) -> &AffineMap {
        &self.embed
    }

    /// `u + c`.
    pub fn with_shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.shift += c;
        out
    }

    /// `k·u`, the symbol of `kφ` for the bundle `kL`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.factor *= k;
        out.shift *= k;
        out
    }

    pub fn with_perturbation(&self, g: Perturbation) -> Self {
        let mut out = self.clone();
        out.perturbation = g;
        out
    }

    pub fn with_halfwidth(&self, halfwidth: f64) -> Self {
        let mut out = self.clone();
        out.halfwidth = halfwidth;
        out
    }

    /// The symbol with `g` dropped and no constant shift.
    pub fn reference_symbol(&self) -> Self {
        let mut out = self.with_perturbation(Perturbation::Zero);
        out.shift = 0.0;
        out
    }

    /// Pull back along `map`, which sends `dim`-dimensional coordinates into
    /// the current domain.
    pub fn pullback(&self, map: &AffineMap, dim: usize) -> Self {
        let mut out = self.clone();
        out.embed = self.embed.compose(map);
        out.dim = dim;
        out
    }

    /// Slope range reached by the reference symbol in the current
    /// coordinates, times the factor: the Newton polytope of `u₀`.
    pub fn reference_params(&self) -> (f64, f64) {
        let s = self.factor;
        match self.reference {
            ReferenceKind::FubiniStudy { a } | ReferenceKind::Simplex { a } => (s * a, 0.0),
            ReferenceKind::Product { a, b } => (s * a, s * b),
        }
    }

    fn lift(&self, t: &[f64]) -> [f64; 2] {
        let s = [t[0], if self.dim > 1 { t[1] } else { 0.0 }];
        self.embed.apply(s)
    }

    fn pull_jet(&self, val: f64, grad: [f64; 2], hess: [[f64; 2]; 2], shift: f64) -> Jet {
        let l = &self.embed.lin;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for a in 0..self.dim {
            g[a] = self.factor * (l[0][a] * grad[0] + l[1][a] * grad[1]);
            for b in 0..self.dim {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += l[i][a] * hess[i][j] * l[j][b];
                    }
                }
                h[a][b] = self.factor * acc;
            }
        }
        Jet {
            value: self.factor * val + shift,
            grad: g,
            hess: h,
        }
    }

    fn reference_raw(&self, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let mut val = 0.0;
        let mut grad = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        for term in &self.terms {
            let (v, g, h) = term.jet(x);
            val += v;
            for i in 0..2 {
                grad[i] += g[i];
                for j in 0..2 {
                    hess[i][j] += h[i][j];
                }
            }
        }
        (val, grad, hess)
    }

    /// Full jet of `u` at `t`.
    pub fn jet(&self, t: &[f64]) -> Jet {
        let x = self.lift(t);
        let (v0, g0, h0) = self.reference_raw(x);
        let (v1, g1, h1) = self.perturbation.jet(x, self.ambient_dim());
        let mut g = g0;
        let mut h = h0;
        for i in 0..2 {
            g[i] += g1[i];
            for j in 0..2 {
                h[i][j] += h1[i][j];
            }
        }
        self.pull_jet(v0 + v1, g, h, self.shift)
    }

    /// Jet of the reference part `factor·u₀` only.
    pub fn reference_jet(&self, t: &[f64]) -> Jet {
        let x = self.lift(t);
        let (v, g, h) = self.reference_raw(x);
        self.pull_jet(v, g, h, 0.0)
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        let x = self.lift(t);
        let (v0, _, _) = self.reference_raw(x);
        let (v1, _, _) = self.perturbation.jet(x, self.ambient_dim());
        self.factor * (v0 + v1) + self.shift
    }

    pub fn gradient(&self, t: &[f64]) -> [f64; 2] {
        self.jet(t).grad
    }

    pub fn hessian(&self, t: &[f64]) -> [[f64; 2]; 2] {
        self.jet(t).hess
    }

    /// Density of the reference Monge-Ampère measure `dim!·det Hess(factor·u₀)`
    /// with respect to Lebesgue measure in the current coordinates.
    pub fn mu_density(&self, t: &[f64]) -> f64 {
        let h = self.reference_jet(t).hess;
        det_scaled(&h, self.dim)
    }
}

/// `d!·det` of the leading `d×d` block.
pub(crate) fn det_scaled(h: &[[f64; 2]; 2], d: usize) -> f64 {
    match d {
        1 => h[0][0],
        _ => 2.0 * (h[0][0] * h[1][1] - h[0][1] * h[1][0]),
    }
}

/// Smallest eigenvalue of the leading `d×d` symmetric block.
pub(crate) fn min_eigenvalue(h: &[[f64; 2]; 2], d: usize) -> f64 {
    match d {
        1 => h[0][0],
        _ => {
            let tr = 0.5 * (h[0][0] + h[1][1]);
            let diff = 0.5 * (h[0][0] - h[1][1]);
            tr - diff.hypot(h[0][1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(u: &WeightSymbol, t: [f64; 2]) {
        let d = u.dim();
        let eps = 1e-5;
        let jet = u.jet(&t[..d]);
        for i in 0..d {
            let mut tp = t;
            let mut tm = t;
            tp[i] += eps;
            tm[i] -= eps;
            let fd = (u.value(&tp[..d]) - u.value(&tm[..d])) / (2.0 * eps);
            assert!((fd - jet.grad[i]).abs() < 1e-8, "grad {i}: {fd} vs {}", jet.grad[i]);
            let gp = u.gradient(&tp[..d]);
            let gm = u.gradient(&tm[..d]);
            for j in 0..d {
                let fd = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((fd - jet.hess[j][i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let bumps = Perturbation::Bumps(vec![Bump {
            amplitude: 0.7,
            center: [0.3, -0.2],
            width: 1.3,
        }]);
        let cases = [
            WeightSymbol::new(ReferenceKind::FubiniStudy { a: 1.0 }, bumps.clone(), 12.0),
            WeightSymbol::new(ReferenceKind::Product { a: 1.0, b: 2.0 }, bumps.clone(), 12.0),
            WeightSymbol::new(ReferenceKind::Simplex { a: 1.0 }, bumps, 12.0),
            WeightSymbol::new(
                ReferenceKind::Simplex { a: 1.0 },
                Perturbation::Tilt { amount: 0.3 },
                12.0,
            ),
        ];
        for u in &cases {
            for t in [[0.0, 0.0], [1.1, -0.4], [-3.0, 2.5]] {
                fd_check(u, t);
            }
        }
    }

    #[test]
    fn fubini_study_closed_form() {
        let u = WeightSymbol::new(ReferenceKind::FubiniStudy { a: 1.0 }, Perturbation::Zero, 12.0);
        assert!((u.value(&[0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((u.hessian(&[0.0])[0][0] - 0.25).abs() < 1e-15);
        assert!((u.value(&[800.0]) - 800.0).abs() < 1e-12);
        assert!(u.value(&[-800.0]).abs() < 1e-300);
    }

    #[test]
    fn diagonal_pullback_of_product() {
        let u = WeightSymbol::new(
            ReferenceKind::Product { a: 1.0, b: 1.0 },
            Perturbation::Bumps(vec![Bump {
                amplitude: 1.0,
                center: [0.0, 0.0],
                width: 1.0,
            }]),
            12.0,
        );
        let diag = AffineMap {
            lin: [[1.0, 0.0], [1.0, 0.0]],
            off: [0.0, 0.0],
        };
        let z = u.pullback(&diag, 1);
        for t in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let want = 2.0 * (1.0 + f64::exp(t)).ln() + (-2.0 * t * t).exp();
            assert!((z.value(&[t]) - want).abs() < 1e-14);
        }
        fd_check(&z, [0.4, 0.0]);
    }

    #[test]
    fn mu_density_totals() {
        let u = WeightSymbol::new(ReferenceKind::FubiniStudy { a: 1.0 }, Perturbation::Zero, 12.0);
        let s = 1.0 / (1.0 + f64::exp(-0.8));
        assert!((u.mu_density(&[0.8]) - s * (1.0 - s)).abs() < 1e-15);
        let p = WeightSymbol::new(ReferenceKind::Product { a: 1.0, b: 1.0 }, Perturbation::Zero, 12.0);
        assert!((p.mu_density(&[0.0, 0.0]) - 2.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn scaling_and_shift() {
        let u = WeightSymbol::new(ReferenceKind::Simplex { a: 1.0 }, Perturbation::Zero, 12.0);
        let v = u.scaled(2.0).with_shift(3.0);
        let t = [0.2, -1.0];
        assert!((v.value(&t) - (2.0 * u.value(&t) + 3.0)).abs() < 1e-14);
        assert_eq!(v.reference_params(), (2.0, 0.0));
    }
}
