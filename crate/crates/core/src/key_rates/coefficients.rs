use crate::attacks::AttackParams;

/// Variances and correlations of the one-way output modes at modulation `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneWayCoefficients {
    /// Bob's total variance `(1-T) W + T V`.
    pub b_v: f64,
    /// Eve's total variance `(1-T) V + T W`.
    pub e_v: f64,
    /// Bob's variance given Alice's value, `(1-T) W + T`.
    pub b_1: f64,
    /// Eve's variance given Alice's value, `(1-T) + T W`.
    pub e_1: f64,
    /// `sqrt(T (W^2-1))`, the `E'`-`E''` correlation.
    pub phi: f64,
    /// `(W - V) sqrt((1-T) T)`, the `B`-`E'` correlation.
    pub mu: f64,
    /// `sqrt((1-T)(W^2-1))`, the `B`-`E''` correlation.
    pub theta: f64,
}

impl OneWayCoefficients {
    pub fn new(v: f64, params: &AttackParams) -> Self {
        let AttackParams { t, w } = *params;
        Self {
            b_v: (1.0 - t) * w + t * v,
            e_v: (1.0 - t) * v + t * w,
            b_1: (1.0 - t) * w + t,
            e_1: (1.0 - t) + t * w,
            phi: (t * (w * w - 1.0)).sqrt(),
            mu: (w - v) * ((1.0 - t) * t).sqrt(),
            theta: ((1.0 - t) * (w * w - 1.0)).sqrt(),
        }
    }
}

/// Coefficients of the two-way output CMs with identical resources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWayCoefficients {
    pub mu_prime: f64,
    pub theta_prime: f64,
    pub gamma: f64,
    pub varsigma: f64,
    pub upsilon: f64,
    /// Product of the two large eigenvalues of Bob's CM, divided by `V^2`.
    pub f_product: f64,
    /// Product of the two large eigenvalues of Eve's CM, divided by `V^2`.
    pub h_product: f64,
    /// `m1 m2` in the homodyne two-way RR conditional spectrum.
    pub m_product: f64,
    /// `n1 n2 n3` in the heterodyne two-way RR conditional spectrum.
    pub n_product: f64,
}

impl TwoWayCoefficients {
    pub fn new(v: f64, params: &AttackParams) -> Self {
        let AttackParams { t, w } = *params;
        let one = OneWayCoefficients::new(v, params);
        let s = (1.0 - t).sqrt();
        Self {
            mu_prime: -s * one.mu,
            theta_prime: -s * one.theta,
            gamma: t * (1.0 - t) * v + (1.0 - t).powi(2) * w + t * w,
            varsigma: (1.0 + t * t * (t * t + t - 2.0)).sqrt(),
            upsilon: (1.0 + 3.0 * t + t * t).sqrt(),
            f_product: t,
            h_product: (1.0 - t).powi(2),
            m_product: ((1.0 - t).powi(3) * (1.0 + t.powi(3)) * w / t).sqrt(),
            n_product: super::n_product_closed_form(params),
        }
    }
}
