//! JSON description of a module, as read by the command line.
//!
//! ```json
//! {"coeff": {"p": 5, "m": 1, "f": 1}, "construction": "extension",
//!  "chars": [{"at_p": 1, "at_gen": 2}, {"at_p": 1, "at_gen": 1}],
//!  "cocycle": [[-1, 1]], "window": {"B": 64, "N": 40}, "w_limit_n": 2}
//! ```
//!
//! For an extension, `cocycle` lists the terms `[e, c]` of the Laurent
//! polynomial `a` forming the `phi` component of a cocycle of
//! `E(delta1 / delta2)`; the `sigma_a` component is solved for.

use super::{Construction, PhiGammaError, PhiGammaModule, Result, Series, WindowSchedule};
use crate::padic_core::{Coeff, Ring, RingSpec};
use crate::series::EXACT;
use serde::{Deserialize, Serialize};

/// A coefficient: an integer, or `[c0, c1]` meaning `c0 + c1 t` in `F_{p^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    Int(i64),
    Pair([i64; 2]),
}

impl CoeffSpec {
    pub fn to_coeff(self, ring: &Ring) -> Result<Coeff> {
        match self {
            CoeffSpec::Int(a) => Ok(ring.from_int(a)),
            CoeffSpec::Pair([a, b]) if ring.f() == 2 => Ok(ring.from_pair(a, b)),
            CoeffSpec::Pair(_) => Err(PhiGammaError::Spec("pair coefficient over a prime field".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharSpec {
    pub at_p: CoeffSpec,
    pub at_gen: CoeffSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    /// Tail bound: largest pole allowed in intermediate series.
    #[serde(rename = "B")]
    pub tail_bound: i64,
    /// Depth of the deepest window.
    #[serde(rename = "N")]
    pub depth: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub coeff: RingSpec,
    #[serde(default)]
    pub gamma_generator: Option<u64>,
    pub construction: Construction,
    pub chars: Vec<CharSpec>,
    #[serde(default)]
    pub cocycle: Vec<(i64, CoeffSpec)>,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub w_limit_n: Option<u32>,
}

/// A module with the window schedule and `w_*` limit index to use for it.
#[derive(Clone, Debug)]
pub struct BuiltModule {
    pub module: PhiGammaModule,
    pub schedule: WindowSchedule,
    pub w_limit_n: u32,
}

/// Smallest `n >= 2` with `p^n` at least twice the shallow window of a
/// module with pole shift `s`; consecutive partial sums of `w_*` agree
/// roughly below `X^(p^n)`.
pub fn w_limit_for(p: i64, s: i64) -> u32 {
    let need = 2 * (2 * p + 2 + s + 2 * s + 2);
    let mut n = 2u32;
    while p.pow(n) < need {
        n += 1;
    }
    n
}

pub fn default_w_limit(d: &PhiGammaModule) -> u32 {
    w_limit_for(d.ring().p() as i64, d.pole_shift())
}

/// Margin of the deepest window for `w_*`: `(s + 1) p^n` digits, since each
/// `psi` loses the pole shift `s` on the first component.
fn involution_margin(p: i64, s: i64, n: u32) -> i64 {
    (s + 1) * p.pow(n) + 2 * s + 4
}

pub fn schedule_for_involution(d: &PhiGammaModule, n: u32) -> WindowSchedule {
    let p = d.ring().p() as i64;
    WindowSchedule::standard(d, involution_margin(p, d.pole_shift(), n))
}

/// Precision of the solved `sigma_a` component of an extension.
fn extension_precision(p: i64, depth: i64, pole: i64) -> i64 {
    p * (depth + 2 * pole + 4) + 16
}

impl ModuleSpec {
    pub fn from_json(s: &str) -> Result<ModuleSpec> {
        serde_json::from_str(s).map_err(|e| PhiGammaError::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<BuiltModule> {
        let ring = Ring::from_spec(self.coeff)?;
        if ring.m() != 1 {
            return Err(PhiGammaError::NotAField(ring.to_string()));
        }
        let p = ring.p() as i64;
        let chars: Vec<(Coeff, Coeff)> = self
            .chars
            .iter()
            .map(|c| Ok((c.at_p.to_coeff(&ring)?, c.at_gen.to_coeff(&ring)?)))
            .collect::<Result<_>>()?;
        let rank1 = |(at_p, at_gen): (Coeff, Coeff)| -> Result<PhiGammaModule> {
            match self.gamma_generator {
                Some(a) => PhiGammaModule::rank1_with_generator(ring, at_p, at_gen, a),
                None => PhiGammaModule::rank1(ring, at_p, at_gen),
            }
        };
        let expected = match self.construction {
            Construction::Rank1 => 1,
            _ => 2,
        };
        if chars.len() != expected {
            return Err(PhiGammaError::Spec(format!("{} needs {expected} characters", self.construction.label())));
        }
        if self.construction != Construction::Extension && !self.cocycle.is_empty() {
            return Err(PhiGammaError::Spec("cocycle given for a split module".into()));
        }
        let tail = self.window.map(|w| w.tail_bound);
        let module = match self.construction {
            Construction::Rank1 => rank1(chars[0])?,
            Construction::DirectSum => PhiGammaModule::direct_sum(&rank1(chars[0])?, &rank1(chars[1])?)?,
            Construction::Extension => {
                let (d1, d2) = (rank1(chars[0])?, rank1(chars[1])?);
                if self.cocycle.is_empty() {
                    return Err(PhiGammaError::Spec("extension without a cocycle".into()));
                }
                let lo = self.cocycle.iter().map(|t| t.0).min().unwrap_or(0);
                let hi = self.cocycle.iter().map(|t| t.0).max().unwrap_or(0);
                let mut coeffs = vec![ring.zero(); (hi - lo + 1) as usize];
                for &(e, c) in &self.cocycle {
                    let i = (e - lo) as usize;
                    coeffs[i] = ring.add(coeffs[i], c.to_coeff(&ring)?);
                }
                let a = Series::new(ring, lo, coeffs, EXACT);
                let pole = (-lo).max(0);
                let depth = self.window.map_or(0, |w| w.depth);
                let n = self.w_limit_n.unwrap_or_else(|| w_limit_for(p, pole));
                let reach = depth.max(2 * p + 8 + pole + involution_margin(p, pole, n));
                PhiGammaModule::extension_from_phi_part(&d1, &d2, &a, extension_precision(p, reach, pole))?
            }
        };
        let module = match tail {
            Some(b) => module.with_tail_bound(b)?,
            None => module,
        };
        let w_limit_n = self.w_limit_n.unwrap_or_else(|| default_w_limit(&module));
        let schedule = match self.window {
            Some(w) => {
                let mut s = WindowSchedule::standard(&module, 0);
                let last = s.depths.len() - 1;
                if w.depth <= s.depths[last - 1] {
                    return Err(PhiGammaError::Spec(format!("window depth N must exceed {}", s.depths[last - 1])));
                }
                s.depths[last] = w.depth;
                s
            }
            None => schedule_for_involution(&module, w_limit_n),
        };
        Ok(BuiltModule { module, schedule, w_limit_n })
    }
}
