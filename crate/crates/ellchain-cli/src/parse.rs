//! Text forms of complex numbers and lists.

use ellchain::{c64, C64};

/// Accepts "a", "bi", "a+bi", "a-bi", "i", "-i" (also with `j`, spaces ignored).
pub fn complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("not a complex number: '{text}'");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| c64(re, 0.0)).map_err(|_| bad());
    };
    // split before the sign that starts the imaginary part, skipping exponent signs
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(c64(re.parse::<f64>().map_err(|_| bad())?, im))
}

pub fn complex_list(text: &str) -> Result<Vec<C64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(complex).collect()
}

pub fn int_list(text: &str) -> Result<Vec<i32>, String> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| format!("not an integer: '{t}'"))
        })
        .collect()
}

/// "1,2;1,-1" → [(1, 2), (1, −1)].
pub fn pairs(text: &str) -> Result<Vec<(i32, i32)>, String> {
    text.split(';')
        .map(|p| match int_list(p)?.as_slice() {
            &[a, b] => Ok((a, b)),
            _ => Err(format!("a pair is two integers 'n,m', got '{p}'")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.3+0.05i").unwrap(), c64(0.3, 0.05));
        assert_eq!(complex("-0.2-0.1i").unwrap(), c64(-0.2, -0.1));
        assert_eq!(complex("2i").unwrap(), c64(0.0, 2.0));
        assert_eq!(complex("-i").unwrap(), c64(0.0, -1.0));
        assert_eq!(complex("0.7").unwrap(), c64(0.7, 0.0));
        assert_eq!(complex("1e-3-2.5e-2i").unwrap(), c64(1e-3, -2.5e-2));
        assert_eq!(complex(" 1 + 2 j").unwrap(), c64(1.0, 2.0));
        assert!(complex("abc").is_err());
        assert!(complex("").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(
            complex_list("0.31+0.1i,-0.2").unwrap(),
            vec![c64(0.31, 0.1), c64(-0.2, 0.0)]
        );
        assert_eq!(pairs("1,2;1,-1").unwrap(), vec![(1, 2), (1, -1)]);
        assert!(pairs("1,2,3").is_err());
        assert_eq!(int_list("1,-1, 2").unwrap(), vec![1, -1, 2]);
    }
}
