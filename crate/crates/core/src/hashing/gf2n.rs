/// Binary extension field `GF(2^k)`, `k <= 128`, elements as the low `k`
/// bits of a `u128` (bit `i` is the coefficient of `x^i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    degree: u32,
    /// The modulus without its leading `x^k` term.
    low: u128,
}

impl Field {
    /// `x^8 + x^4 + x^3 + x + 1`.
    pub const GF2_8: Field = Field::new(8, 0x1b);
    /// `x^10 + x^3 + 1`.
    pub const GF2_10: Field = Field::new(10, 0x9);
    /// `x^64 + x^4 + x^3 + x + 1`.
    pub const GF2_64: Field = Field::new(64, 0x1b);
    /// `x^128 + x^7 + x^2 + x + 1`.
    pub const GF2_128: Field = Field::new(128, 0x87);

    pub const fn new(degree: u32, low: u128) -> Self {
        assert!(degree >= 1 && degree <= 128);
        Self { degree, low }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> f64 {
        2f64.powi(self.degree as i32)
    }

    pub fn mask(&self) -> u128 {
        if self.degree == 128 {
            u128::MAX
        } else {
            (1u128 << self.degree) - 1
        }
    }

    /// Multiplication by shift-and-add with reduction at every step.
    pub fn mul(&self, mut a: u128, mut b: u128) -> u128 {
        let mask = self.mask();
        let top = 1u128 << (self.degree - 1);
        a &= mask;
        b &= mask;
        let mut r = 0u128;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            let carry = a & top != 0;
            a = (a << 1) & mask;
            if carry {
                a ^= self.low;
            }
        }
        r
    }

    pub fn pow(&self, mut a: u128, mut e: u128) -> u128 {
        let mut r = 1u128;
        while e != 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }
}
