/// Distance in units of least precision between two finite doubles.
///
/// Maps the bit patterns onto a monotone integer line so that `-0.0` and
/// `0.0` are zero apart and values straddling zero are measured through it.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    fn ordered(v: f64) -> i64 {
        let bits = v.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    ordered(a).abs_diff(ordered(b))
}
