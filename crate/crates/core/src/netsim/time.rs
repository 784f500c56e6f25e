//! Simulated time in integer nanoseconds.

pub type SimTime = u64;

pub const NS_PER_US: SimTime = 1_000;
pub const NS_PER_MS: SimTime = 1_000_000;
pub const NS_PER_SEC: SimTime = 1_000_000_000;

pub fn from_ms(ms: f64) -> SimTime {
    (ms * NS_PER_MS as f64).round() as SimTime
}

pub fn from_secs(s: f64) -> SimTime {
    (s * NS_PER_SEC as f64).round() as SimTime
}

pub fn to_ms(t: SimTime) -> f64 {
    t as f64 / NS_PER_MS as f64
}

pub fn to_secs(t: SimTime) -> f64 {
    t as f64 / NS_PER_SEC as f64
}

/// Serialization time of `bytes` at `bandwidth_bps`, rounded up to whole nanoseconds.
pub fn serialization(bytes: usize, bandwidth_bps: u64) -> SimTime {
    let bits = bytes as u128 * 8 * NS_PER_SEC as u128;
    bits.div_ceil(bandwidth_bps as u128) as SimTime
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(from_ms(1.5), 1_500_000);
        assert_eq!(to_ms(2_500_000), 2.5);
        assert_eq!(from_secs(0.5), NS_PER_SEC / 2);
        assert_eq!(serialization(1240, 10_000_000), 992_000);
        assert_eq!(serialization(1, 3), 2_666_666_667);
    }
}
