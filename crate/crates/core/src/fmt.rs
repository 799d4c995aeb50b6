//! Float formatting for CSV outputs.

use std::fmt;

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub struct Csv(pub f64);

impl fmt::Display for Csv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::Csv;

    #[test]
    fn forms() {
        assert_eq!(Csv(0.3).to_string(), "0.3");
        assert_eq!(Csv(0.0).to_string(), "0");
        assert_eq!(Csv(3.75e-7).to_string(), "3.75e-7");
        assert_eq!(Csv(-1e-300).to_string(), "-1e-300");
        assert_eq!("3.75e-7".parse::<f64>().unwrap(), 3.75e-7);
    }
}
