//! 32-bit machine integers.
//!
//! Every operation wraps modulo 2^32. Shift and rotate amounts are taken
//! modulo 32. Signed and unsigned views share the same `i32` bits.

/// Left rotation by `n mod 32`.
pub fn rol(x: i32, n: i32) -> i32 {
    (x as u32).rotate_left((n as u32) & 31) as i32
}

/// `rol(x, n) & m`.
pub fn rolm(x: i32, n: i32, m: i32) -> i32 {
    rol(x, n) & m
}

pub fn shl(x: i32, n: i32) -> i32 {
    ((x as u32) << ((n as u32) & 31)) as i32
}

/// Arithmetic right shift.
pub fn shr(x: i32, n: i32) -> i32 {
    x >> ((n as u32) & 31)
}

/// Logical right shift.
pub fn shru(x: i32, n: i32) -> i32 {
    ((x as u32) >> ((n as u32) & 31)) as i32
}

/// Signed division; undefined for a zero divisor and for `MIN / -1`.
pub fn divs(x: i32, y: i32) -> Option<i32> {
    if y == 0 || (x == i32::MIN && y == -1) {
        None
    } else {
        Some(x / y)
    }
}

/// Signed remainder with the same definedness as [`divs`].
pub fn mods(x: i32, y: i32) -> Option<i32> {
    divs(x, y).map(|q| x.wrapping_sub(q.wrapping_mul(y)))
}

pub fn divu(x: i32, y: i32) -> Option<i32> {
    if y == 0 {
        None
    } else {
        Some(((x as u32) / (y as u32)) as i32)
    }
}

pub fn modu(x: i32, y: i32) -> Option<i32> {
    if y == 0 {
        None
    } else {
        Some(((x as u32) % (y as u32)) as i32)
    }
}

/// Signed low 16 bits; `n == high(n) * 65536 + low(n)`.
pub fn low(n: i32) -> i32 {
    n as i16 as i32
}

/// Signed high half matching [`low`].
pub fn high(n: i32) -> i32 {
    n.wrapping_sub(low(n)) >> 16
}

/// Whether `n` is representable as a signed 16-bit immediate.
pub fn fits_s16(n: i32) -> bool {
    (i16::MIN as i32..=i16::MAX as i32).contains(&n)
}

/// Whether `n` is representable as an unsigned 16-bit immediate.
pub fn fits_u16(n: i32) -> bool {
    (n as u32) <= 0xFFFF
}

pub fn sign_ext(x: i32, bits: u32) -> i32 {
    let s = 32 - bits;
    (x << s) >> s
}

pub fn zero_ext(x: i32, bits: u32) -> i32 {
    if bits >= 32 {
        x
    } else {
        ((x as u32) & ((1u32 << bits) - 1)) as i32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_examples() {
        assert_eq!(rol(0x8000_0001u32 as i32, 1), 3);
        assert_eq!(rol(5, 32), 5);
        assert_eq!(rol(1, 33), 2);
    }

    #[test]
    fn high_low_split() {
        assert_eq!((high(0x12345), low(0x12345)), (1, 0x2345));
        assert_eq!((high(-1), low(-1)), (0, -1));
        assert_eq!((high(0x8000), low(0x8000)), (1, -0x8000));
    }

    #[test]
    fn division_edge_cases() {
        assert_eq!(divs(7, 0), None);
        assert_eq!(divs(i32::MIN, -1), None);
        assert_eq!(mods(i32::MIN, -1), None);
        assert_eq!(mods(-7, 2), Some(-1));
        assert_eq!(divu(-1, 2), Some(0x7FFF_FFFF));
        assert_eq!(modu(7, 0), None);
    }

    proptest::proptest! {
        #[test]
        fn shifts_are_rotate_and_mask(x: i32, n in 0i32..32) {
            proptest::prop_assert_eq!(shl(x, n), rolm(x, n, shl(-1, n)));
            proptest::prop_assert_eq!(shru(x, n), rolm(x, 32 - n, shru(-1, n)));
            proptest::prop_assert_eq!(x & n, rolm(x, 0, n));
        }

        #[test]
        fn rolm_composition(x: i32, n1: i32, m1: i32, n2: i32, m2: i32) {
            proptest::prop_assert_eq!(
                rolm(rolm(x, n1, m1), n2, m2),
                rolm(x, n1.wrapping_add(n2), rol(m1, n2) & m2)
            );
        }

        #[test]
        fn high_low_recombine(n: i32) {
            proptest::prop_assert_eq!(high(n).wrapping_mul(65536).wrapping_add(low(n)), n);
            proptest::prop_assert!(fits_s16(high(n)) && fits_s16(low(n)));
        }
    }
}
