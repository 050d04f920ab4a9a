use std::collections::VecDeque;

use super::HashError;

/// Size of the pre-shared key a session starts from.
pub const BOOTSTRAP_KEY_BITS: usize = 4096;
/// Bits taken once per session for the authentication hash key.
pub const SETUP_KEY_BITS: usize = 256;

/// Pool of secret bits available for authentication.
///
/// Starts from the pre-shared bootstrap key and is refilled from each
/// frame's privacy-amplification output.
#[derive(Debug, Clone, Default)]
pub struct KeyLedger {
    pool: VecDeque<u8>,
    setup_consumed: usize,
    consumed: usize,
    replenished: usize,
}

impl KeyLedger {
    pub fn new(bootstrap: &[u8]) -> Self {
        Self {
            pool: bootstrap.iter().map(|b| b & 1).collect(),
            ..Self::default()
        }
    }

    pub fn available(&self) -> usize {
        self.pool.len()
    }

    fn draw(&mut self, n: usize) -> Result<Vec<u8>, HashError> {
        if n > self.pool.len() {
            return Err(HashError::Exhausted {
                needed: n,
                available: self.pool.len(),
            });
        }
        Ok(self.pool.drain(..n).collect())
    }

    /// Takes the one-off setup material.
    pub fn take_setup(&mut self, n: usize) -> Result<Vec<u8>, HashError> {
        let bits = self.draw(n)?;
        self.setup_consumed += n;
        Ok(bits)
    }

    /// Takes `n` bits for a one-time pad.
    pub fn take(&mut self, n: usize) -> Result<Vec<u8>, HashError> {
        let bits = self.draw(n)?;
        self.consumed += n;
        Ok(bits)
    }

    /// Takes `n <= 128` bits as an integer, first bit most significant.
    pub fn take_u128(&mut self, n: usize) -> Result<u128, HashError> {
        assert!(n <= 128);
        Ok(super::auth::bits_to_u128(&self.take(n)?))
    }

    pub fn replenish(&mut self, bits: &[u8]) {
        self.pool.extend(bits.iter().map(|b| b & 1));
        self.replenished += bits.len();
    }

    /// Bits spent on tags so far, setup excluded.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn setup_consumed(&self) -> usize {
        self.setup_consumed
    }

    pub fn replenished(&self) -> usize {
        self.replenished
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accounting_is_exact() {
        let mut l = KeyLedger::new(&[1; 300]);
        l.take_setup(256).unwrap();
        assert!(matches!(
            l.take(86),
            Err(HashError::Exhausted {
                needed: 86,
                available: 44
            })
        ));
        l.replenish(&[0; 100]);
        assert_eq!(l.take_u128(2).unwrap(), 3);
        l.take(86).unwrap();
        assert_eq!((l.consumed(), l.setup_consumed(), l.available()), (88, 256, 56));
    }
}
