//! Exact parsing of angle strings.
//!
//! Angle fields accept plain decimals and rational multiples of pi written
//! as `pi`, `pi/6`, `2pi/3`, `0.5*pi`, `-pi/4`. Multiples of pi are
//! evaluated as one multiplication and one division of `std::f64::consts::PI`,
//! so `"pi/6"` is bit-identical to `PI / 6.0` — a truncated decimal in a
//! config would not be.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    let Some(idx) = s.find("pi") else {
        return s
            .parse::<f64>()
            .map_err(|_| format!("invalid angle `{s}`"));
    };
    let (head, rest) = (&s[..idx], &s[idx + 2..]);
    let coef = match head.trim().trim_end_matches('*').trim() {
        "" => 1.0,
        "-" => -1.0,
        c => c
            .parse::<f64>()
            .map_err(|_| format!("invalid coefficient in angle `{s}`"))?,
    };
    let denom = match rest.trim() {
        "" => 1.0,
        d => {
            let d = d
                .strip_prefix('/')
                .ok_or_else(|| format!("invalid angle `{s}`: expected `/` after pi"))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| format!("invalid divisor in angle `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero divisor in angle `{s}`"));
            }
            d
        }
    };
    Ok(coef * PI / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_fractions_are_exact() {
        assert_eq!(parse_angle("pi/6").unwrap(), PI / 6.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("5pi").unwrap(), 5.0 * PI);
    }

    #[test]
    fn decimals_pass_through() {
        assert_eq!(parse_angle("0.75").unwrap(), 0.75);
        assert_eq!(parse_angle(" 2e-3 ").unwrap(), 2e-3);
    }

    #[test]
    fn junk_is_rejected(){
        assert!(parse_angle("").is_err());
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("xpi").is_err());
    }
}
