//! Tags messages with the Wegman-Carter scheme, spending one-time pads from
//! a key ledger, and shows that a flipped bit is caught.

use qkd::hashing::{auth_check, auth_forgery_bound, auth_tag, AuthKey, KeyLedger, AUTH_TAG_BITS, SETUP_KEY_BITS};
use qkd::session::bootstrap_key_from_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ledger = KeyLedger::new(&bootstrap_key_from_seed(1));
    let key = AuthKey::from_bits(&ledger.take_setup(SETUP_KEY_BITS)?)?;

    let message = b"syndrome of frame 7".to_vec();
    let pad = ledger.take_u128(AUTH_TAG_BITS as usize)?;
    let tag = auth_tag(&message, &key, pad);
    println!("tag {:x} over {} bytes", tag.bits, message.len());
    println!("genuine message accepted: {}", auth_check(&message, &tag, &key, pad));

    let mut forged = message.clone();
    forged[3] ^= 0x10;
    println!("altered message accepted: {}", auth_check(&forged, &tag, &key, pad));
    println!(
        "forgery bound for this length: {:.2e}",
        auth_forgery_bound(message.len())
    );
    println!(
        "ledger: {} bits left, {} consumed",
        ledger.available(),
        ledger.consumed()
    );
    Ok(())
}
