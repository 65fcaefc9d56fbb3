use super::TripleSample;

/// Below this value of `x·t` the Li-Xu family switches to its series form.
pub(crate) const LI_XU_SERIES_CUTOFF: f64 = 1e-4;

pub(super) fn li_yau(t: f64, x: f64, nm1: f64, alpha: f64, theta: f64) -> TripleSample {
    TripleSample {
        t,
        alpha,
        alpha_prime: 0.0,
        phi: alpha * nm1 / t + nm1 * x / (alpha - 1.0),
        phi_prime: -alpha * nm1 / (t * t),
        gamma: t.powf(theta),
        gamma_prime: theta * t.powf(theta - 1.0),
    }
}

pub(super) fn hamilton(t: f64, x: f64, nm1: f64) -> TripleSample {
    let e2 = (2.0 * x * t).exp();
    let e4 = e2 * e2;
    TripleSample {
        t,
        alpha: e2,
        alpha_prime: 2.0 * x * e2,
        phi: nm1 * e4 / t,
        phi_prime: nm1 * e4 * (4.0 * x / t - 1.0 / (t * t)),
        gamma: t * e2,
        gamma_prime: e2 * (1.0 + 2.0 * x * t),
    }
}

pub(super) fn linear_li_xu(t: f64, x: f64, nm1: f64, c: f64) -> TripleSample {
    TripleSample {
        t,
        alpha: 1.0 + c * x * t,
        alpha_prime: c * x,
        phi: nm1 / t + c * nm1 * x,
        phi_prime: -nm1 / (t * t),
        gamma: c * x * t,
        gamma_prime: c * x,
    }
}

/// `α - 1 = coth s - s/sinh² s` together with `d(α-1)/ds`.
fn li_xu_alpha_excess(s: f64) -> (f64, f64) {
    if s < LI_XU_SERIES_CUTOFF {
        let s2 = s * s;
        return (
            2.0 * s / 3.0 - 4.0 * s * s2 / 45.0,
            2.0 / 3.0 - 4.0 * s2 / 15.0,
        );
    }
    let coth = 1.0 / s.tanh();
    let excess = if s < 1.0 {
        // sinh(2s) - 2s summed directly to avoid cancellation
        let z = 2.0 * s;
        let z2 = z * z;
        let mut term = z * z2 / 6.0;
        let mut sum = term;
        let mut k = 2.0;
        while term > sum * 1e-18 {
            term *= z2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        let sh = s.sinh();
        sum / (2.0 * sh * sh)
    } else {
        // coth s - s csch² s written with q = e^{-2s}
        let q = (-2.0 * s).exp();
        let one_minus_q = -(-2.0 * s).exp_m1();
        coth - s * 4.0 * q / (one_minus_q * one_minus_q)
    };
    (excess, 2.0 - 2.0 * excess * coth)
}

fn csch_sq(s: f64) -> f64 {
    let q = (-2.0 * s).exp();
    let one_minus_q = -(-2.0 * s).exp_m1();
    4.0 * q / (one_minus_q * one_minus_q)
}

fn sech_sq(s: f64) -> f64 {
    let q = (-2.0 * s).exp();
    4.0 * q / ((1.0 + q) * (1.0 + q))
}

pub(super) fn li_xu(t: f64, x: f64, nm1: f64) -> TripleSample {
    let s = x * t;
    let (excess, d_excess) = li_xu_alpha_excess(s);
    let coth = 1.0 / s.tanh();
    // 2n(m-1)²MK = 2·n(m-1)·x
    let scale = 2.0 * nm1 * x;
    TripleSample {
        t,
        alpha: 1.0 + excess,
        alpha_prime: x * d_excess,
        phi: scale * (1.0 + coth),
        phi_prime: -scale * x * csch_sq(s),
        gamma: s.tanh(),
        gamma_prime: x * sech_sq(s),
    }
}
