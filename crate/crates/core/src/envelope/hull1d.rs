use crate::error::{Error, Result};

/// A supporting line `σ·t + b` of the envelope, active on `[from, to]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportLine {
    pub slope: f64,
    pub intercept: f64,
    pub from: f64,
    pub to: f64,
}

impl SupportLine {
    pub fn eval(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

/// Slope-constrained lower convex envelope of samples on a line.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull1d {
    /// Sample indices of the lower-hull vertices that carry the envelope.
    pub vertices: Vec<usize>,
    pub lines: Vec<SupportLine>,
    pub values: Vec<f64>,
    /// Subgradient `[left, right]` of the envelope at each sample.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Andrew's monotone chain; collinear points are dropped, so ties resolve to
/// the outermost points in `t` order.
fn lower_chain(t: &[f64], u: &[f64]) -> Vec<usize> {
    let mut st: Vec<usize> = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        while st.len() >= 2 {
            let a = st[st.len() - 2];
            let b = st[st.len() - 1];
            let cross = (t[b] - t[a]) * (u[i] - u[a]) - (u[b] - u[a]) * (t[i] - t[a]);
            if cross <= 0.0 {
                st.pop();
            } else {
                break;
            }
        }
        st.push(i);
    }
    st
}

/// Largest convex function below the samples whose slopes lie in `[lo, hi]`.
/// Points beyond the extreme vertices are governed by the recession lines of
/// slope `lo` and `hi`.
pub fn lower_envelope_1d(t: &[f64], u: &[f64], lo: f64, hi: f64) -> Result<Hull1d> {
    let n = t.len();
    if n < 2 || u.len() != n {
        return Err(Error::HullDegenerate(format!("need matching samples, got {n} and {}", u.len())));
    }
    if t.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::HullDegenerate("abscissae must increase strictly".into()));
    }
    if !(lo < hi) || u.iter().any(|x| !x.is_finite()) {
        return Err(Error::HullDegenerate(format!("bad slope range [{lo}, {hi}] or data")));
    }
    let chain = lower_chain(t, u);
    let last = chain.len() - 1;
    let sigma: Vec<f64> = chain
        .windows(2)
        .map(|w| (u[w[1]] - u[w[0]]) / (t[w[1]] - t[w[0]]))
        .collect();
    let k_lo = (0..=last).find(|&k| k == last || sigma[k] > lo).unwrap_or(last);
    let k_hi = (0..=last).rev().find(|&k| k == 0 || sigma[k - 1] < hi).unwrap_or(0);
    if k_lo > k_hi {
        return Err(Error::HullDegenerate(format!(
            "recession vertices out of order ({k_lo} > {k_hi})"
        )));
    }
    let vertices: Vec<usize> = chain[k_lo..=k_hi].to_vec();

    let through = |slope: f64, i: usize, from: f64, to: f64| SupportLine {
        slope,
        intercept: u[i] - slope * t[i],
        from,
        to,
    };
    let mut lines = Vec::with_capacity(vertices.len() + 1);
    lines.push(through(lo, chain[k_lo], f64::NEG_INFINITY, t[chain[k_lo]]));
    for k in k_lo..k_hi {
        lines.push(through(sigma[k], chain[k], t[chain[k]], t[chain[k + 1]]));
    }
    lines.push(through(hi, chain[k_hi], t[chain[k_hi]], f64::INFINITY));

    let mut values = vec![0.0; n];
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    let mut piece = 0;
    let mut next_vertex = 0;
    for i in 0..n {
        while t[i] > lines[piece].to {
            piece += 1;
        }
        let line = &lines[piece];
        if next_vertex < vertices.len() && vertices[next_vertex] == i {
            let k = k_lo + next_vertex;
            values[i] = u[i];
            left[i] = if k == k_lo { lo } else { sigma[k - 1] };
            right[i] = if k == k_hi { hi } else { sigma[k] };
            next_vertex += 1;
        } else {
            // Evaluate from the line's own anchor vertex.
            values[i] = line.eval(t[i]);
            left[i] = line.slope;
            right[i] = line.slope;
        }
    }
    Ok(Hull1d {
        vertices,
        lines,
        values,
        left,
        right,
    })
}

impl Hull1d {
    /// The envelope at an arbitrary abscissa: the maximum of the support lines.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.lines
            .iter()
            .map(|l| l.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Subgradient jumps `right - left` at every sample.
    pub fn jumps(&self) -> Vec<f64> {
        self.left.iter().zip(&self.right).map(|(l, r)| r - l).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn convex_feasible_data_is_fixed() {
        let t = axis(101, 8.0);
        let u: Vec<f64> = t.iter().map(|x| (1.0 + x.exp()).ln()).collect();
        let h = lower_envelope_1d(&t, &u, 0.0, 1.0).unwrap();
        assert_eq!(h.values, u);
        let total: f64 = h.jumps().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(h.jumps().iter().all(|j| *j >= 0.0));
    }

    #[test]
    fn slopes_outside_the_range_become_rays() {
        let t = axis(41, 2.0);
        let u: Vec<f64> = t.iter().map(|x| x * x).collect();
        let h = lower_envelope_1d(&t, &u, -1.0, 1.0).unwrap();
        for (x, v) in t.iter().zip(&h.values) {
            let want = if x.abs() <= 0.5 { x * x } else { x.abs() - 0.25 };
            assert!((v - want).abs() < 0.01, "t={x}: {v} vs {want}");
        }
        assert!((h.jumps().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(h.values.iter().zip(&u).all(|(v, u)| *v <= u + 1e-12));
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let u = [0.0, 1.0, 2.0, 3.0];
        let h = lower_envelope_1d(&t, &u, -5.0, 5.0).unwrap();
        assert_eq!(h.vertices, vec![0, 3]);
        assert_eq!(h.values, u.to_vec());
        assert_eq!(h.jumps(), vec![6.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn nonconvex_bridge() {
        let t = axis(9, 4.0);
        let u = [4.0, 2.0, 0.0, 0.0, 5.0, 0.0, 0.0, 2.0, 4.0];
        let h = lower_envelope_1d(&t, &u, -2.0, 2.0).unwrap();
        assert_eq!(h.values[4], 0.0);
        assert_eq!(h.jumps()[4], 0.0);
        assert!(h.evaluate(0.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lower_envelope_1d(&[0.0, 0.0], &[1.0, 1.0], 0.0, 1.0).is_err());
        assert!(lower_envelope_1d(&[0.0, 1.0], &[1.0, 1.0], 1.0, 1.0).is_err());
        assert!(lower_envelope_1d(&[0.0, 1.0], &[1.0, f64::NAN], 0.0, 1.0).is_err());
    }
}
