//! Measurement-angle handling: per-party (unprimed, primed) pairs, the
//! named angle presets, and a small `pi`-literal parser so angles can be
//! written as `pi/4`, `-3pi/4`, or raw radians.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::mermin::Choice;

/// One (a_i, a_i') angle pair per party.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementAngles {
    pairs: Vec<(f64, f64)>,
}

impl MeasurementAngles {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one angle pair".into(),
            ));
        }
        for &(unprimed, primed) in &pairs {
            for v in [unprimed, primed] {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "angle",
                        value: v,
                        requirement: "must be finite",
                    });
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn parties(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Select one angle per party according to a monomial's choice vector.
    pub fn for_choices(&self, choices: &[Choice]) -> Result<Vec<f64>> {
        if choices.len() != self.pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "angle set covers {} parties but the term has {}",
                self.pairs.len(),
                choices.len()
            )));
        }
        Ok(choices
            .iter()
            .zip(&self.pairs)
            .map(|(choice, &(unprimed, primed))| match choice {
                Choice::Unprimed => unprimed,
                Choice::Primed => primed,
            })
            .collect())
    }
}

/// Parse an angle given either as raw radians (`0.5`, `-1.2e-1`) or as a
/// multiple of pi (`pi`, `-pi/4`, `3pi/4`, `0.5pi/2`).
pub fn parse_angle(input: &str) -> Result<f64> {
    let s = input.trim();
    let bad = |msg: &str| Error::InvalidArgument(format!("bad angle '{input}': {msg}"));
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some(pos) = rest.find("pi") {
        let coefficient = if pos == 0 {
            1.0
        } else {
            rest[..pos]
                .parse::<f64>()
                .map_err(|_| bad("cannot read the factor before 'pi'"))?
        };
        let divisor = match &rest[pos + 2..] {
            "" => 1.0,
            tail => {
                let d = tail
                    .strip_prefix('/')
                    .ok_or_else(|| bad("only '/<number>' may follow 'pi'"))?
                    .parse::<f64>()
                    .map_err(|_| bad("cannot read the divisor after 'pi/'"))?;
                if d == 0.0 {
                    return Err(bad("division by zero"));
                }
                d
            }
        };
        coefficient * PI / divisor
    } else {
        rest.parse::<f64>()
            .map_err(|_| bad("expected radians or a pi expression"))?
    };
    if !value.is_finite() {
        return Err(bad("not finite"));
    }
    Ok(sign * value)
}

/// Names accepted by [`preset`], in display order.
pub const PRESET_NAMES: [&str; 4] = ["sc-pi", "sc-zero", "ss-pi", "ss-zero"];

/// Named angle configurations used throughout the analysis.
///
/// The `sc-*` presets cover three parties, the `ss-*` presets four; `*-pi`
/// sets pair with a relative phase of pi, `*-zero` with zero phase. Returns
/// `None` for unknown names.
pub fn preset(name: &str) -> Option<MeasurementAngles> {
    let pairs = match name {
        // a=0, a'=pi/2, b=-pi/4, b'=pi/4, c=pi/4, c'=-pi/4
        "sc-pi" => vec![(0.0, FRAC_PI_2), (-FRAC_PI_4, FRAC_PI_4), (FRAC_PI_4, -FRAC_PI_4)],
        // a=-pi/4, a'=pi/2, b=-pi/4, b'=pi/4, c=0, c'=pi/4
        "sc-zero" => vec![
            (-FRAC_PI_4, FRAC_PI_2),
            (-FRAC_PI_4, FRAC_PI_4),
            (0.0, FRAC_PI_4),
        ],
        // a=0, a'=pi/2, b=-pi/4, b'=pi/4, c=d=pi/4, c'=d'=-pi/4
        "ss-pi" => vec![
            (0.0, FRAC_PI_2),
            (-FRAC_PI_4, FRAC_PI_4),
            (FRAC_PI_4, -FRAC_PI_4),
            (FRAC_PI_4, -FRAC_PI_4),
        ],
        // a=-pi/4, a'=pi/2, b=-pi/4, b'=pi/4, c=-pi/2, c'=0, d=pi/4, d'=3pi/4
        "ss-zero" => vec![
            (-FRAC_PI_4, FRAC_PI_2),
            (-FRAC_PI_4, FRAC_PI_4),
            (-FRAC_PI_2, 0.0),
            (FRAC_PI_4, 3.0 * FRAC_PI_4),
        ],
        _ => return None,
    };
    Some(MeasurementAngles { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pi_literals() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle(" +pi/2 ").unwrap(), FRAC_PI_2);
    }

    #[test]
    fn parses_raw_radians() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("0.785").unwrap(), 0.785);
        assert_eq!(parse_angle("-1.25e-1").unwrap(), -0.125);
    }

    #[test]
    fn rejects_malformed_angles() {
        for bad in ["", "pie", "pi//2", "pi/0", "pi*2", "2 pi", "nan", "inf"] {
            assert!(parse_angle(bad).is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn presets_have_the_documented_shape() {
        for name in PRESET_NAMES {
            let angles = preset(name).unwrap();
            let expected = if name.starts_with("sc") { 3 } else { 4 };
            assert_eq!(angles.parties(), expected, "{name}");
        }
        assert!(preset("sc-PI").is_none());
        assert!(preset("chsh").is_none());
    }

    #[test]
    fn preset_values_spot_check() {
        let sc_pi = preset("sc-pi").unwrap();
        assert_eq!(sc_pi.pairs()[0], (0.0, FRAC_PI_2));
        assert_eq!(sc_pi.pairs()[2], (FRAC_PI_4, -FRAC_PI_4));
        let ss_zero = preset("ss-zero").unwrap();
        assert_eq!(ss_zero.pairs()[2], (-FRAC_PI_2, 0.0));
        assert_eq!(ss_zero.pairs()[3], (FRAC_PI_4, 3.0 * FRAC_PI_4));
    }

    #[test]
    fn choice_selection_picks_the_right_column() {
        let angles = MeasurementAngles::new(vec![(0.1, 0.2), (0.3, 0.4)]).unwrap();
        let picked = angles
            .for_choices(&[Choice::Primed, Choice::Unprimed])
            .unwrap();
        assert_eq!(picked, vec![0.2, 0.3]);
        assert!(angles.for_choices(&[Choice::Primed]).is_err());
    }

    #[test]
    fn validates_inputs() {
        assert!(MeasurementAngles::new(vec![]).is_err());
        assert!(MeasurementAngles::new(vec![(f64::NAN, 0.0)]).is_err());
    }
}
