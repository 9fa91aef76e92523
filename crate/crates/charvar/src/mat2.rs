//! Complex 2x2 matrices and the small amount of SU(2) geometry the rest of
//! the crate needs.
//!
//! Conventions: matrices are row-major `[[a, b], [c, d]]`.  A real 3-vector
//! `v` is identified with the traceless Hermitian matrix `v . sigma` where
//! `sigma` are the Pauli matrices, so `v . sigma = [[z, x - iy], [x + iy, -z]]`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mat2 {
    pub fn new(a: C, b: C, c: C, d: C) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    pub fn from_rows(rows: [[C; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    /// Column `j` (1-indexed, matching the Pluecker index convention).
    pub fn col(&self, j: usize) -> [C; 2] {
        match j {
            1 => [self.a, self.c],
            2 => [self.b, self.d],
            _ => panic!("column index must be 1 or 2"),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    /// Adjugate; equals the inverse when `det == 1`.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn scale(&self, s: C) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn norm_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        (*self - *other).norm_sq().sqrt() <= tol
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a + r.a, self.b + r.b, self.c + r.c, self.d + r.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a - r.a, self.b - r.b, self.c - r.c, self.d - r.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(c(-1.0, 0.0))
    }
}

/// `det(u, v)` for column 2-vectors.
pub fn det2(u: [C; 2], v: [C; 2]) -> C {
    u[0] * v[1] - u[1] * v[0]
}

pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn add3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

pub fn sub3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

pub fn scale3(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

pub fn approx3(u: [f64; 3], v: [f64; 3], tol: f64) -> bool {
    norm3(sub3(u, v)) <= tol
}

pub fn dot3(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub fn cross3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// `v . sigma` as a (traceless Hermitian) matrix.
pub fn pauli(v: [f64; 3]) -> Mat2 {
    let [x, y, z] = v;
    Mat2::new(c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0))
}

/// Inverse of [`pauli`] on Hermitian traceless matrices; symmetrises first so
/// small numerical drift is harmless.
pub fn pauli_vector(h: &Mat2) -> [f64; 3] {
    let x = 0.5 * (h.c.re + h.b.re);
    let y = 0.5 * (h.c.im - h.b.im);
    let z = 0.5 * (h.a.re - h.d.re);
    [x, y, z]
}

/// `u (v . sigma) u^dagger` as a vector, i.e. the coadjoint rotation of `v`.
pub fn conj_vector(u: &Mat2, v: [f64; 3]) -> [f64; 3] {
    pauli_vector(&(*u * pauli(v) * u.dagger()))
}

/// exp(t * v.sigma) for real t: cosh(t|v|) I + sinh(t|v|) vhat.sigma.
/// The exponent is Hermitian traceless so the result has determinant one.
pub fn exp_hermitian(v: [f64; 3], t: f64) -> Mat2 {
    let n = norm3(v);
    if n * t.abs() < 1e-300 {
        return Mat2::identity();
    }
    let (ch, sh) = ((t * n).cosh(), (t * n).sinh());
    let id = Mat2::identity().scale(c(ch, 0.0));
    id + pauli(scale3(v, sh / n))
}

/// An SU(2) element rotating `a` to `b` coadjointly (requires |a| = |b| > 0).
pub fn rotation_between(a: [f64; 3], b: [f64; 3]) -> Mat2 {
    let (na, nb) = (norm3(a), norm3(b));
    assert!(na > 0.0 && nb > 0.0, "rotation_between needs nonzero vectors");
    let ah = scale3(a, 1.0 / na);
    let bh = scale3(b, 1.0 / nb);
    let axis = cross3(ah, bh);
    let s = norm3(axis);
    let d = dot3(ah, bh);
    if s < 1e-14 {
        if d > 0.0 {
            return Mat2::identity();
        }
        // Antipodal: rotate by pi about any axis orthogonal to a.
        let mut perp = cross3(ah, [1.0, 0.0, 0.0]);
        if norm3(perp) < 1e-8 {
            perp = cross3(ah, [0.0, 1.0, 0.0]);
        }
        return rotation_about(scale3(perp, 1.0 / norm3(perp)), std::f64::consts::PI);
    }
    let angle = s.atan2(d);
    rotation_about(scale3(axis, 1.0 / s), angle)
}

/// exp(-i (angle/2) axis.sigma): the SU(2) element rotating vectors about
/// `axis` (unit length) by `angle` under the coadjoint action.
pub fn rotation_about(axis: [f64; 3], angle: f64) -> Mat2 {
    let (co, si) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let p = pauli(axis);
    Mat2::identity().scale(c(co, 0.0)) + p.scale(c(0.0, -si))
}

/// An SU(2) matrix `h` with `h (v.sigma) h^dagger = |v| sigma_3`.
pub fn diagonalizer(v: [f64; 3]) -> Mat2 {
    let n = norm3(v);
    assert!(n > 0.0, "diagonalizer needs a nonzero vector");
    rotation_between(v, [0.0, 0.0, n])
}

/// Square root of a positive Hermitian matrix with determinant one.
pub fn sqrt_pos_det1(p: &Mat2) -> Mat2 {
    let t = p.trace().re;
    (*p + Mat2::identity()).scale(c(1.0 / (t + 2.0).sqrt(), 0.0))
}

/// Polar decomposition `g = k p` with `k` unitary and `p` positive Hermitian,
/// both of determinant one (requires `det g = 1`).
pub fn polar(g: &Mat2) -> (Mat2, Mat2) {
    let p = sqrt_pos_det1(&(g.dagger() * *g));
    let k = *g * p.adjugate();
    (k, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn pauli_round_trip() {
        let v = [0.3, -1.2, 0.7];
        let h = pauli(v);
        assert_eq!(pauli_vector(&h), v);
        assert!(close(-h.det().re, norm3(v).powi(2)));
    }

    #[test]
    fn polar_reconstructs() {
        let g = Mat2::new(c(2.0, 0.3), c(0.1, -0.4), c(0.5, 0.2), c(0.7, 0.1));
        let g = g.scale(c(1.0, 0.0) / g.det().sqrt());
        let (k, p) = polar(&g);
        assert!((k * p).approx_eq(&g, 1e-12));
        assert!((k * k.dagger()).approx_eq(&Mat2::identity(), 1e-12));
        assert!(close(k.det().norm(), 1.0));
        assert!(p.approx_eq(&p.dagger(), 1e-12));
    }

    #[test]
    fn rotation_moves_vectors() {
        let a = [1.0, 2.0, -0.5];
        let b = [2.0, -1.0, 0.5];
        let b = scale3(b, norm3(a) / norm3(b));
        let u = rotation_between(a, b);
        let moved = conj_vector(&u, a);
        assert!(norm3(sub3(moved, b)) < 1e-12);
        assert!(close(u.det().re, 1.0));
    }

    #[test]
    fn diagonalizer_sends_to_axis() {
        let v = [0.4, -0.1, -2.0];
        let h = diagonalizer(v);
        let d = conj_vector(&h, v);
        assert!(norm3(sub3(d, [0.0, 0.0, norm3(v)])) < 1e-12);
    }

    #[test]
    fn exp_hermitian_has_det_one() {
        let m = exp_hermitian([0.3, 0.1, -0.2], 0.7);
        assert!(close(m.det().re, 1.0));
        assert!(close(m.det().im, 0.0));
    }
}
