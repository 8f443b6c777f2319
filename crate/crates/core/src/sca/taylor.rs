//! First-order minorants used to convexify the rate constraints.

use num_complex::Complex64;

use crate::channel::{inner, CVector};
use crate::conic::Affine;

/// `f(x, x_bar) = exp(x_bar) (1 + x - x_bar)`, the tangent of `exp` at `x_bar`.
pub fn taylor_exp(x: f64, x_bar: f64) -> f64 {
    x_bar.exp() * (1.0 + x - x_bar)
}

/// `g_c(d, d_bar) = |c^H d_bar|^2 + 2 Re((c c^H d_bar)^H (d - d_bar))`, an
/// affine-in-`d` minorant of `|c^H d|^2`.
pub fn taylor_quad(c: &CVector, d: &CVector, d_bar: &CVector) -> f64 {
    let s_bar = inner(c, d_bar);
    2.0 * (s_bar.conj() * inner(c, d)).re - s_bar.norm_sqr()
}

/// `f(expr, x_bar)` as an affine expression in the variables of `expr`.
pub(crate) fn exp_tangent(expr: &Affine, x_bar: f64) -> Affine {
    let e = x_bar.exp();
    expr.clone().plus_const(1.0 - x_bar).scale(e)
}

/// Real and imaginary parts of `c^H w`, where `w` is stored as interleaved
/// `(re, im)` variables starting at `w_vars[0]`.
pub(crate) fn inner_re_im(c: &CVector, w_vars: &[usize]) -> (Affine, Affine) {
    let mut re = Affine::default();
    let mut im = Affine::default();
    for (i, ci) in c.iter().enumerate() {
        let (wr, wi) = (w_vars[2 * i], w_vars[2 * i + 1]);
        // conj(c_i) w_i = (cr wr + ci wi) + i (cr wi - ci wr)
        re = re.term(wr, ci.re).term(wi, ci.im);
        im = im.term(wi, ci.re).term(wr, -ci.im);
    }
    (re, im)
}

/// `g_c(w, w_bar)` as an affine expression in the beam variables.
pub(crate) fn quad_tangent(c: &CVector, w_vars: &[usize], w_bar: &CVector) -> Affine {
    let s_bar = inner(c, w_bar);
    let mut out = Affine::constant(-s_bar.norm_sqr());
    for (i, ci) in c.iter().enumerate() {
        // 2 Re(a w_i) with a = conj(s_bar) conj(c_i)
        let a: Complex64 = s_bar.conj() * ci.conj();
        out = out.term(w_vars[2 * i], 2.0 * a.re).term(w_vars[2 * i + 1], -2.0 * a.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn exp_examples() {
        assert_eq!(taylor_exp(0.0, 0.0), 1.0);
        assert_eq!(taylor_exp(1.0, 0.0), 2.0);
        assert!(taylor_exp(1.0, 0.0) <= 1f64.exp());
    }

    #[test]
    fn quad_examples() {
        let e1 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let d = e1.scale(2.0);
        assert_eq!(taylor_quad(&e1, &e1, &e1), 1.0);
        assert_eq!(taylor_quad(&e1, &d, &e1), 3.0);
    }

    #[test]
    fn affine_forms_match_direct_evaluation() {
        let c = DVector::from_vec(vec![Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4)]);
        let w_bar = DVector::from_vec(vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.9)]);
        let w = DVector::from_vec(vec![Complex64::new(-0.4, 0.6), Complex64::new(0.8, -0.3)]);
        let vars = [0, 1, 2, 3];
        let x: Vec<f64> = w.iter().flat_map(|z| [z.re, z.im]).collect();
        let (re, im) = inner_re_im(&c, &vars);
        let s = inner(&c, &w);
        assert!((re.eval(&x) - s.re).abs() < 1e-15 && (im.eval(&x) - s.im).abs() < 1e-15);
        assert!((quad_tangent(&c, &vars, &w_bar).eval(&x) - taylor_quad(&c, &w, &w_bar)).abs() < 1e-14);
        let t = exp_tangent(&Affine::var(0).term(1, 1.0), 0.2);
        assert!((t.eval(&x) - taylor_exp(x[0] + x[1], 0.2)).abs() < 1e-15);
    }
}
