//! Bitstring helpers. A string `x in {0,1}^n` is stored as the integer whose
//! binary expansion is `x_1 x_2 ... x_n`, so `x_1` is the most significant bit
//! and bit positions are 1-based.

/// `x_i` for `i` in `1..=n`.
#[inline]
pub fn bit(x: usize, i: usize, n: usize) -> usize {
    debug_assert!(i >= 1 && i <= n);
    (x >> (n - i)) & 1
}

/// Mask selecting position `i` (1-based) of an `n`-bit string.
#[inline]
pub fn mask(i: usize, n: usize) -> usize {
    1 << (n - i)
}

#[inline]
pub fn hamming(x: usize, y: usize) -> usize {
    (x ^ y).count_ones() as usize
}

pub fn to_string(x: usize, n: usize) -> String {
    (1..=n)
        .map(|i| if bit(x, i, n) == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a string of `0`/`1` characters; returns `(value, length)`.
pub fn parse(s: &str) -> Option<(usize, usize)> {
    if s.is_empty() || s.len() > usize::BITS as usize - 1 {
        return None;
    }
    s.chars().try_fold((0usize, 0usize), |(v, n), ch| match ch {
        '0' => Some((v << 1, n + 1)),
        '1' => Some(((v << 1) | 1, n + 1)),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_indexing() {
        let (x, n) = parse("101").unwrap();
        assert_eq!((x, n), (5, 3));
        assert_eq!(bit(x, 1, n), 1);
        assert_eq!(bit(x, 2, n), 0);
        assert_eq!(bit(x, 3, n), 1);
        assert_eq!(to_string(x, n), "101");
        assert_eq!(to_string(1, 4), "0001");
        assert_eq!(mask(1, 3), 0b100);
        assert!(parse("10a").is_none());
    }

    #[test]
    fn hamming_distance() {
        assert_eq!(hamming(0b0110, 0b0110), 0);
        assert_eq!(hamming(0b0000, 0b1111), 4);
        assert_eq!(hamming(0b1010, 0b0110), 2);
    }
}
