use crate::Rational;

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_pq(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_pq(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Rational::from_integer),
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub(crate) mod serde_pq {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_pq(*r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_pq(&s).ok_or_else(|| de::Error::custom(format!("not a rational: {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pq_round_trip() {
        for r in [
            Rational::new(10, 3),
            Rational::from_integer(6),
            Rational::new(-1, 2),
        ] {
            assert_eq!(parse_pq(&format_pq(r)), Some(r));
        }
        assert_eq!(format_pq(Rational::from_integer(18)), "18/1");
        assert_eq!(parse_pq("7"), Some(Rational::from_integer(7)));
        assert_eq!(parse_pq("1/0"), None);
        assert_eq!(parse_pq("x"), None);
    }
}
