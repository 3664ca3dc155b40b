//! 2x2 matrices for the shear and parabolic dilation actions.

use std::ops::Mul;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    /// Horizontal shear `[[1, -s], [0, 1]]`.
    pub fn shear(s: f64) -> Self {
        Mat2([[1.0, -s], [0.0, 1.0]])
    }

    /// Horizontal dilation `diag(a, sgn(a) |a|^(1/2))`.
    pub fn dilation(a: f64) -> Self {
        Mat2([[a, 0.0], [0.0, a.signum() * a.abs().sqrt()]])
    }

    /// Vertical shear `[[1, 0], [-s, 1]]`.
    pub fn shear_v(s: f64) -> Self {
        Mat2([[1.0, 0.0], [-s, 1.0]])
    }

    /// Vertical dilation `diag(sgn(a) |a|^(1/2), a)`.
    pub fn dilation_v(a: f64) -> Self {
        Mat2([[a.signum() * a.abs().sqrt(), 0.0], [0.0, a]])
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        let m = self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// Group element `(b, s, a)` of the shearlet group with its law
/// `(b, s, a)(b', s', a') = (b + N_s A_a b', s + s' |a|^(1/2), a a')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearletElement {
    pub b: [f64; 2],
    pub s: f64,
    pub a: f64,
}

impl ShearletElement {
    pub fn compose(&self, other: &ShearletElement) -> ShearletElement {
        let m = Mat2::shear(self.s) * Mat2::dilation(self.a);
        let t = m.apply(other.b);
        ShearletElement {
            b: [self.b[0] + t[0], self.b[1] + t[1]],
            s: self.s + other.s * self.a.abs().sqrt(),
            a: self.a * other.a,
        }
    }

    /// Affine action `x -> N_s A_a x + b`.
    pub fn act(&self, x: [f64; 2]) -> [f64; 2] {
        let t = (Mat2::shear(self.s) * Mat2::dilation(self.a)).apply(x);
        [t[0] + self.b[0], t[1] + self.b[1]]
    }
}
