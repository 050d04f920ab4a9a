use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProtocolError;
use crate::sim::{AliceSource, Basis, ClickRecord, PulseRecord};

/// Bob's squashed detection in one pulse slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub pulse_index: u64,
    pub basis: Basis,
    pub bit: u8,
    pub during_scan: bool,
}

/// One sifted position: both parties' bits in the shared basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiftedPair {
    pub pulse_index: u64,
    pub basis: Basis,
    pub alice_bit: u8,
    pub bob_bit: u8,
    pub during_scan: bool,
}

/// Reduces the clicks of every slot to one detection.
///
/// A single click is kept as is. Two detectors of one basis firing
/// together give that basis and a uniformly random bit; clicks in both bases
/// first pick a basis uniformly, then resolve within it. Output is in slot
/// order; `seed` drives the random assignments.
pub fn resolve_clicks(clicks: &[ClickRecord], seed: u64) -> Vec<Detection> {
    let mut sorted: Vec<&ClickRecord> = clicks.iter().collect();
    sorted.sort_by_key(|c| c.pulse_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sorted.len());
    for group in sorted.chunk_by(|a, b| a.pulse_index == b.pulse_index) {
        let during_scan = group.iter().any(|c| c.during_scan);
        let mut fired = [[false; 2]; 2];
        for c in group {
            fired[c.basis().index() as usize][c.bit() as usize] = true;
        }
        let active: Vec<usize> = (0..2).filter(|&b| fired[b][0] || fired[b][1]).collect();
        let basis = if active.len() == 2 {
            rng.random_range(0..2)
        } else {
            active[0]
        };
        let bit = match fired[basis] {
            [true, true] => rng.random::<u8>() & 1,
            [true, false] => 0,
            _ => 1,
        };
        out.push(Detection {
            pulse_index: group[0].pulse_index,
            basis: Basis::from_index(basis as u8),
            bit,
            during_scan,
        });
    }
    out
}

/// Indices into `detections` whose basis equals Alice's basis for the same
/// pulse.
pub fn match_bases(detections: &[Detection], alice_bases: &[Basis]) -> Result<Vec<usize>, ProtocolError> {
    if detections.len() != alice_bases.len() {
        return Err(ProtocolError::Sync(format!(
            "{} detections but {} announced bases",
            detections.len(),
            alice_bases.len()
        )));
    }
    Ok(detections
        .iter()
        .zip(alice_bases)
        .enumerate()
        .filter(|(_, (d, a))| d.basis == **a)
        .map(|(i, _)| i)
        .collect())
}

fn sift_by(
    clicks: &[ClickRecord],
    seed: u64,
    mut alice: impl FnMut(u64) -> Result<(Basis, u8), ProtocolError>,
) -> Result<Vec<SiftedPair>, ProtocolError> {
    let mut out = Vec::new();
    for d in resolve_clicks(clicks, seed) {
        let (basis, bit) = alice(d.pulse_index)?;
        if basis == d.basis {
            out.push(SiftedPair {
                pulse_index: d.pulse_index,
                basis,
                alice_bit: bit,
                bob_bit: d.bit,
                during_scan: d.during_scan,
            });
        }
    }
    Ok(out)
}

/// Sifts against Alice's pulse records, which must be sorted by index and
/// cover every clicked slot.
pub fn sift(
    alice_records: &[PulseRecord],
    bob_clicks: &[ClickRecord],
    seed: u64,
) -> Result<Vec<SiftedPair>, ProtocolError> {
    sift_by(bob_clicks, seed, |slot| {
        alice_records
            .binary_search_by_key(&slot, |p| p.pulse_index)
            .map(|i| (alice_records[i].basis, alice_records[i].bit))
            .map_err(|_| ProtocolError::Sync(format!("click in slot {slot} has no pulse record")))
    })
}

/// Sifts against Alice's regenerable state sequence.
pub fn sift_with_source(
    alice: &mut AliceSource,
    bob_clicks: &[ClickRecord],
    seed: u64,
) -> Result<Vec<SiftedPair>, ProtocolError> {
    sift_by(bob_clicks, seed, |slot| Ok(alice.prepare(slot)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn click(slot: u64, det: u8) -> ClickRecord {
        ClickRecord {
            pulse_index: slot,
            detector_id: det,
            timestamp_s: slot as f64 * 1e-8,
            is_dark: false,
            during_scan: false,
        }
    }

    #[test]
    fn same_basis_double_click_keeps_basis() {
        let d = resolve_clicks(&[click(4, 2), click(4, 3)], 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].basis, Basis::X);
    }

    #[test]
    fn missing_pulse_record_is_a_sync_error() {
        assert!(matches!(sift(&[], &[click(0, 0)], 0), Err(ProtocolError::Sync(_))));
    }
}
