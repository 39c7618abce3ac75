/// Formats `v` in positional notation with `digits` significant digits.
pub(crate) fn significant(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", digits - 1, v);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, v)
}

#[cfg(test)]
mod tests {
    use super::significant;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.175, 10), "0.1750000000");
        assert_eq!(significant(1.0, 10), "1.000000000");
        assert_eq!(significant(0.0, 10), "0.000000000");
        assert_eq!(significant(1000.0, 10), "1000.000000");
        assert_eq!(significant(1.0 / 3.0, 17), "0.33333333333333331");
    }
}
