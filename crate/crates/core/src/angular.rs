//! Half-integer angular momenta and Wigner/Clebsch-Gordan coefficients.
//!
//! Quantum numbers are stored as twice their value so 7/2 is exact. The 3j
//! symbol uses the Racah single-sum form with a factorial table; fine for the
//! low spins of nuclear comb transitions (silently exact selection-rule zeros,
//! ~1e-13 accuracy otherwise).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Angular momentum quantum number stored as 2×value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// Accepts only exact multiples of 1/2 (spin values from config files).
    pub fn try_from_f64(x: f64) -> Result<Self> {
        let twice = x * 2.0;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > i32::MAX as f64 {
            return Err(Error::AngularMomentum(format!(
                "{x} is not a multiple of 1/2"
            )));
        }
        Ok(HalfInt(twice as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Multiplicity of the sublevel manifold, 2j+1.
    pub fn multiplicity(self) -> usize {
        (self.0 + 1).max(0) as usize
    }

    /// Sublevels −j, −j+1, …, +j.
    pub fn manifold(self) -> impl Iterator<Item = HalfInt> {
        (-self.0..=self.0).step_by(2).map(HalfInt)
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;
    fn try_from(x: f64) -> Result<Self> {
        HalfInt::try_from_f64(x)
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

const MAX_FACT: usize = 64;

const FACTORIALS: [f64; MAX_FACT] = {
    let mut t = [1.0_f64; MAX_FACT];
    let mut i = 1;
    while i < MAX_FACT {
        t[i] = t[i - 1] * i as f64;
        i += 1;
    }
    t
};

fn fact2(twice: i32) -> f64 {
    // argument is guaranteed even and small by the selection-rule checks
    debug_assert!(twice >= 0 && twice % 2 == 0 && (twice / 2) < MAX_FACT as i32);
    FACTORIALS[(twice / 2) as usize]
}

fn phase_from_twice(twice: i32) -> f64 {
    debug_assert!(twice % 2 == 0, "phase exponent must be an integer");
    if (twice / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol. Returns 0.0 when a selection rule is violated.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> f64 {
    let (tj1, tj2, tj3) = (j1.twice(), j2.twice(), j3.twice());
    let (tm1, tm2, tm3) = (m1.twice(), m2.twice(), m3.twice());

    if tj1 < 0 || tj2 < 0 || tj3 < 0 {
        return 0.0;
    }
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return 0.0;
    }
    // m and j of one particle must share parity
    if (tj1 - tm1) % 2 != 0 || (tj2 - tm2) % 2 != 0 || (tj3 - tm3) % 2 != 0 {
        return 0.0;
    }
    // triangle rule, and the perimeter must be an integer
    if (tj1 + tj2 + tj3) % 2 != 0
        || tj3 < (tj1 - tj2).abs()
        || tj3 > tj1 + tj2
    {
        return 0.0;
    }

    let delta = (fact2(tj1 + tj2 - tj3) * fact2(tj1 - tj2 + tj3) * fact2(-tj1 + tj2 + tj3)
        / fact2(tj1 + tj2 + tj3 + 2))
    .sqrt();

    let norm = (fact2(tj1 + tm1)
        * fact2(tj1 - tm1)
        * fact2(tj2 + tm2)
        * fact2(tj2 - tm2)
        * fact2(tj3 + tm3)
        * fact2(tj3 - tm3))
    .sqrt();

    // summation limits keep every factorial argument non-negative
    let k_min = 0
        .max(tj2 - tj3 - tm1)
        .max(tj1 - tj3 + tm2);
    let k_max = (tj1 + tj2 - tj3).min(tj1 - tm1).min(tj2 + tm2);

    let mut sum = 0.0;
    let mut tk = k_min;
    while tk <= k_max {
        let term = fact2(tk)
            * fact2(tj1 + tj2 - tj3 - tk)
            * fact2(tj1 - tm1 - tk)
            * fact2(tj2 + tm2 - tk)
            * fact2(tj3 - tj2 + tm1 + tk)
            * fact2(tj3 - tj1 - tm2 + tk);
        sum += phase_from_twice(tk) / term;
        tk += 2;
    }

    phase_from_twice(tj1 - tj2 - tm3) * delta * norm * sum
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | j3 m3⟩.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j3: HalfInt,
    m3: HalfInt,
) -> f64 {
    if (j1.twice() - j2.twice() + m3.twice()) % 2 != 0 {
        return 0.0;
    }
    phase_from_twice(j1.twice() - j2.twice() + m3.twice())
        * ((j3.twice() + 1) as f64).sqrt()
        * wigner_3j(j1, j2, j3, m1, m2, -m3)
}

/// Squared ΔM = 0 coupling weight ⟨I_g M; k 0 | I_e M⟩² for a 2^k-pole transition.
pub fn transition_weight(i_g: HalfInt, i_e: HalfInt, rank: u32, m: HalfInt) -> Result<f64> {
    if i_g.twice() < 0 || i_e.twice() < 0 {
        return Err(Error::AngularMomentum("negative spin".into()));
    }
    if (i_g.twice() - i_e.twice()) % 2 != 0 {
        return Err(Error::AngularMomentum(format!(
            "spins {i_g} and {i_e} differ by a half-integer"
        )));
    }
    let k = HalfInt::from_int(rank as i32);
    if (i_g.twice() - i_e.twice()).abs() > k.twice() || i_e.twice() > i_g.twice() + k.twice() {
        return Err(Error::AngularMomentum(format!(
            "rank-{rank} transition cannot connect {i_g} to {i_e}"
        )));
    }
    if m.abs().twice() > i_g.twice().min(i_e.twice()) {
        return Err(Error::AngularMomentum(format!(
            "sublevel {m} outside both manifolds"
        )));
    }
    let c = clebsch_gordan(i_g, m, k, HalfInt::ZERO, i_e, m);
    Ok(c * c)
}

/// Squared dipole weight ⟨I_g M; 1 0 | I_e M⟩². Requires |I_e − I_g| ≤ 1.
pub fn cg_weight(i_g: HalfInt, i_e: HalfInt, m: HalfInt) -> Result<f64> {
    transition_weight(i_g, i_e, 1, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn halfint_basics() {
        assert_eq!(h(7).to_string(), "7/2");
        assert_eq!(h(4).to_string(), "2");
        assert_eq!(h(7).value(), 3.5);
        assert!(HalfInt::try_from_f64(0.3).is_err());
        assert_eq!(HalfInt::try_from_f64(4.5).unwrap(), h(9));
        assert_eq!(h(3).manifold().count(), 4);
        let ms: Vec<i32> = h(3).manifold().map(|m| m.twice()).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn tabulated_3j_values() {
        // (j j 0; m −m 0) = (−1)^(j−m) / √(2j+1)
        assert_abs_diff_eq!(
            wigner_3j(h(2), h(2), h(0), h(0), h(0), h(0)),
            -1.0 / 3.0_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            wigner_3j(h(1), h(1), h(0), h(1), h(-1), h(0)),
            1.0 / 2.0_f64.sqrt(),
            epsilon = 1e-14
        );
        // textbook entries
        assert_abs_diff_eq!(
            wigner_3j(h(2), h(2), h(4), h(0), h(0), h(0)),
            (2.0 / 15.0_f64).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            wigner_3j(h(4), h(2), h(2), h(0), h(0), h(0)),
            (2.0 / 15.0_f64).sqrt(),
            epsilon = 1e-14
        );
        // odd perimeter with all m = 0 vanishes
        assert_abs_diff_eq!(
            wigner_3j(h(2), h(2), h(2), h(0), h(0), h(0)),
            0.0,
            epsilon = 1e-15
        );
        // selection-rule violations return zero
        assert_eq!(wigner_3j(h(2), h(2), h(8), h(0), h(0), h(0)), 0.0);
        assert_eq!(wigner_3j(h(2), h(2), h(4), h(2), h(0), h(0)), 0.0);
    }

    #[test]
    fn clebsch_gordan_half_spins() {
        // ⟨1/2 1/2; 1/2 −1/2 | 1 0⟩ = 1/√2
        assert_abs_diff_eq!(
            clebsch_gordan(h(1), h(1), h(1), h(-1), h(2), h(0)),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
        // ⟨1/2 1/2; 1 0 | 3/2 1/2⟩² = 2/3
        let c = clebsch_gordan(h(1), h(1), h(2), h(0), h(3), h(1));
        assert_abs_diff_eq!(c * c, 2.0 / 3.0, epsilon = 1e-13);
    }

    // Independent closed forms for the ΔM = 0 dipole weights
    // (stretched, parallel and shrinking couplings respectively).
    fn dipole_up(j: f64, m: f64) -> f64 {
        ((j + 1.0) * (j + 1.0) - m * m) / ((j + 1.0) * (2.0 * j + 1.0))
    }
    fn dipole_same(j: f64, m: f64) -> f64 {
        m * m / (j * (j + 1.0))
    }
    fn dipole_down(j: f64, m: f64) -> f64 {
        (j * j - m * m) / (j * (2.0 * j + 1.0))
    }

    #[test]
    fn dipole_weights_match_closed_forms() {
        for tj in 1..=9 {
            let j = h(tj);
            for m in j.manifold() {
                assert_abs_diff_eq!(
                    cg_weight(j, h(tj + 2), m).unwrap(),
                    dipole_up(j.value(), m.value()),
                    epsilon = 1e-13
                );
                if tj >= 2 {
                    assert_abs_diff_eq!(
                        cg_weight(j, j, m).unwrap(),
                        dipole_same(j.value(), m.value()),
                        epsilon = 1e-13
                    );
                    if m.abs().twice() <= tj - 2 {
                        assert_abs_diff_eq!(
                            cg_weight(j, h(tj - 2), m).unwrap(),
                            dipole_down(j.value(), m.value()),
                            epsilon = 1e-13
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frozen_7_2_to_9_2_weights() {
        // the I_g = 7/2 → I_e = 9/2 dipole table used by the tantalum comb
        let ig = h(7);
        let ie = h(9);
        assert_abs_diff_eq!(cg_weight(ig, ie, h(1)).unwrap(), 5.0 / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(cg_weight(ig, ie, h(-1)).unwrap(), 5.0 / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(cg_weight(ig, ie, h(3)).unwrap(), 1.0 / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(cg_weight(ig, ie, h(5)).unwrap(), 7.0 / 18.0, epsilon = 1e-13);
        assert_abs_diff_eq!(cg_weight(ig, ie, h(7)).unwrap(), 2.0 / 9.0, epsilon = 1e-13);
    }

    #[test]
    fn rank_two_weights_nonzero_for_delta_i_two() {
        // 9/2 → 5/2 needs rank 2; rank 1 must refuse
        assert!(cg_weight(h(9), h(5), h(1)).is_err());
        for m in h(5).manifold() {
            let w = transition_weight(h(9), h(5), 2, m).unwrap();
            assert!(w > 0.0, "rank-2 weight vanished at m = {m}");
        }
    }

    #[test]
    fn orthogonality_sum_rule() {
        // Σ_{m1 m2} (2j3+1) · 3j(j1 j2 j3; m1 m2 m3)² = 1 for each (j3, m3)
        let j1 = h(7);
        let j2 = h(2);
        for tj3 in [5, 7, 9] {
            let j3 = h(tj3);
            let m3 = h(3);
            let mut s = 0.0;
            for m1 in j1.manifold() {
                for m2 in j2.manifold() {
                    if m1.twice() + m2.twice() + m3.twice() == 0 {
                        let w = wigner_3j(j1, j2, j3, m1, m2, m3);
                        s += (j3.twice() + 1) as f64 * w * w;
                    }
                }
            }
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }
}
