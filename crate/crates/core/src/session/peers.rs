use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::channel::Channel;
use super::messages::{BasisAnnounce, FrameAck, PaSeed, Payload, SampleDisclose, Syndrome, VerifyHash};
use super::report::{AbortInfo, FrameKey, FrameRecord, FrameStatus, Role, SessionReport};
use super::{AbortCode, ClickSource, PulseSource, SessionConfig, SessionError, Transport};
use crate::hashing::{
    auth_check, auth_tag, toeplitz_hash, verify_hash, AuthKey, KeyLedger, ToeplitzSeed, VerifyKey, AUTH_TAG_BITS,
    SETUP_KEY_BITS,
};
use crate::ldpc::{Codebook, Decoder, LdpcError};
use crate::protocol::{estimate_qber, qber_upper_bound, resolve_clicks, sample_positions, split_frame, FrameBuffer};
use crate::security::finite_key_length;
use crate::sim::Basis;

/// One station's view of the quantum exchange.
pub enum Station<'a> {
    Alice(&'a mut dyn PulseSource),
    Bob(&'a mut dyn ClickSource),
}

/// Runs one side of a session to completion or abort.
pub fn run_session<T: Transport>(
    station: Station<'_>,
    transport: T,
    cfg: &SessionConfig,
    codebook: &Codebook,
    seed: u64,
    digest_extra: &str,
) -> SessionReport {
    match station {
        Station::Alice(src) => run_alice(transport, cfg, codebook, src, seed, digest_extra),
        Station::Bob(src) => run_bob(transport, cfg, codebook, src, seed, digest_extra),
    }
}

/// Alice's side. `seed` drives her private choices.
pub fn run_alice<T: Transport>(
    transport: T,
    cfg: &SessionConfig,
    codebook: &Codebook,
    source: &mut dyn PulseSource,
    seed: u64,
    digest_extra: &str,
) -> SessionReport {
    let mut peer = Peer::new(Role::Alice, transport, cfg, codebook, seed, digest_extra);
    let result = peer.alice(source);
    peer.finish(result)
}

/// Bob's side. `seed` drives the squashing of multi-clicks.
pub fn run_bob<T: Transport>(
    transport: T,
    cfg: &SessionConfig,
    codebook: &Codebook,
    source: &mut dyn ClickSource,
    seed: u64,
    digest_extra: &str,
) -> SessionReport {
    let mut peer = Peer::new(Role::Bob, transport, cfg, codebook, seed, digest_extra);
    let result = peer.bob(source);
    peer.finish(result)
}

/// `q_hat` raised by `margin` binomial standard deviations.
fn rate_qber(q_hat: f64, m: usize, margin: f64) -> f64 {
    (q_hat + margin * (q_hat * (1.0 - q_hat) / m as f64).sqrt()).min(0.5)
}

/// A frame that passed reconciliation and waits for the tags.
struct Settled {
    record: FrameRecord,
    /// Amplified key, `nu_auth` ledger bits first.
    amplified: Option<Vec<u8>>,
}

struct Peer<'a, T> {
    ch: Channel<T>,
    cfg: &'a SessionConfig,
    codebook: &'a Codebook,
    rng: ChaCha8Rng,
    digest: [u8; 32],
    ledger: KeyLedger,
    auth_key: Option<AuthKey>,
    buffer: FrameBuffer,
    frame_id: u64,
    report: SessionReport,
    decoders: HashMap<usize, Decoder>,
}

impl<'a, T: Transport> Peer<'a, T> {
    fn new(role: Role, t: T, cfg: &'a SessionConfig, codebook: &'a Codebook, seed: u64, extra: &str) -> Self {
        Self {
            ch: Channel::new(t),
            cfg,
            codebook,
            rng: ChaCha8Rng::seed_from_u64(seed),
            digest: cfg.digest(codebook, extra),
            ledger: KeyLedger::new(&cfg.bootstrap_key),
            auth_key: None,
            buffer: FrameBuffer::new(cfg.frame_len),
            frame_id: 0,
            report: SessionReport::new(role),
            decoders: HashMap::new(),
        }
    }

    fn finish(mut self, result: Result<(), SessionError>) -> SessionReport {
        if let Err(e) = result {
            let info = match &e {
                SessionError::PeerAbort(a) => AbortInfo {
                    code: a.code,
                    reason: a.reason.clone(),
                    security_alarm: a.code == AbortCode::AuthFailure,
                    remote: true,
                },
                other => AbortInfo {
                    code: other.abort_code(),
                    reason: other.to_string(),
                    security_alarm: matches!(other, SessionError::AuthFailure { .. }),
                    remote: false,
                },
            };
            log::warn!(
                "{} aborts in frame {}: {}",
                self.report.role,
                self.frame_id,
                info.reason
            );
            if info.remote {
                self.ch.close();
            } else {
                self.ch.abort(self.frame_id, info.code, &info.reason);
            }
            self.report.abort = Some(info);
        } else {
            self.ch.close();
        }
        self.report.auth_consumed = self.ledger.consumed();
        self.report.auth_setup = self.ledger.setup_consumed();
        self.report.auth_replenished = self.ledger.replenished();
        self.report
    }

    fn setup_auth(&mut self) -> Result<(), SessionError> {
        self.cfg.validate(self.codebook)?;
        let bits = self.ledger.take_setup(SETUP_KEY_BITS)?;
        self.auth_key = Some(AuthKey::from_bits(&bits)?);
        Ok(())
    }

    fn check_hello(&self, p: Payload) -> Result<(), SessionError> {
        match p {
            Payload::FrameAck(FrameAck::Hello(d)) if d == self.digest => Ok(()),
            Payload::FrameAck(FrameAck::Hello(_)) => {
                Err(SessionError::Config("peer configuration digest differs".into()))
            }
            other => Err(unexpected("hello", &other)),
        }
    }

    fn send(&mut self, p: Payload) -> Result<(), SessionError> {
        self.ch.send(self.frame_id, p)
    }

    fn recv(&mut self) -> Result<Payload, SessionError> {
        self.ch.recv_in(self.frame_id)
    }

    fn recv_ack(&mut self) -> Result<FrameAck, SessionError> {
        match self.recv()? {
            Payload::FrameAck(a) => Ok(a),
            other => Err(unexpected("frame ack", &other)),
        }
    }

    fn random_bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.rng.random::<u8>() & 1).collect()
    }

    fn pad(&mut self) -> Result<u128, SessionError> {
        Ok(self.ledger.take_u128(AUTH_TAG_BITS as usize)?)
    }

    fn auth_key(&self) -> AuthKey {
        self.auth_key.expect("authentication set up")
    }

    fn empty_record(&self) -> FrameRecord {
        FrameRecord::empty(
            self.frame_id,
            self.cfg.frame_len,
            self.cfg.sample_len(),
            self.cfg.nu_auth(),
            self.cfg.gllp_a,
        )
    }

    fn estimate(&self, rec: &mut FrameRecord, mine: &[u8], theirs: &[u8]) -> Result<f64, SessionError> {
        let q_hat = estimate_qber(mine, theirs)?;
        rec.q_hat = Some(q_hat);
        rec.q_tilde = Some(qber_upper_bound(q_hat, rec.m, self.cfg.budget.eps_pe)?);
        Ok(rate_qber(q_hat, rec.m, self.cfg.rate_margin_sigma))
    }

    /// Key length once both sides hold the same reconciled key.
    fn bound(&self, rec: &mut FrameRecord) -> Result<usize, SessionError> {
        let q_tilde = rec.q_tilde.expect("estimated");
        let r = finite_key_length(rec.n, q_tilde, rec.leak_ec, rec.nu_auth, rec.a, &self.cfg.budget)?;
        rec.delta = Some(r.delta);
        rec.entropy_term = Some(r.entropy_term);
        rec.leak_ev = r.leak_ev;
        rec.l_key = r.l_key;
        Ok(r.l_key)
    }

    fn keep(&mut self, settled: Settled) {
        let Settled { record, amplified } = settled;
        if let Some(bits) = amplified {
            let nu = record.nu_auth;
            self.ledger.replenish(&bits[..nu]);
            self.report.keys.push(FrameKey {
                frame_id: record.frame_id,
                bits: bits[nu..].to_vec(),
            });
        }
        self.report.frames.push(record);
    }

    // ---------------------------------------------------------------- Alice

    fn alice(&mut self, source: &mut dyn PulseSource) -> Result<(), SessionError> {
        self.setup_auth()?;
        let hello = self.recv()?;
        self.check_hello(hello)?;
        self.send(Payload::FrameAck(FrameAck::Hello(self.digest)))?;
        let mut pending: Option<Settled> = None;
        loop {
            let msg = self.recv()?;
            if let Some(s) = pending.take() {
                self.keep(s);
            }
            match msg {
                Payload::FrameAck(FrameAck::Close { elapsed_ns }) => {
                    self.report.elapsed_s = elapsed_ns as f64 * 1e-9;
                    return Ok(());
                }
                Payload::BasisAnnounce(BasisAnnounce::Detections(idx)) => self.alice_sift(source, &idx)?,
                Payload::FrameAck(ack @ (FrameAck::Keep | FrameAck::DiscardScan)) => {
                    let settled = self.alice_frame(ack == FrameAck::Keep)?;
                    self.alice_tags()?;
                    pending = Some(settled);
                    self.frame_id += 1;
                }
                other => return Err(unexpected("detections or frame start", &other)),
            }
        }
    }

    fn alice_sift(&mut self, source: &mut dyn PulseSource, idx: &[u64]) -> Result<(), SessionError> {
        let states = idx
            .iter()
            .map(|&i| {
                source
                    .prepare(i)
                    .ok_or_else(|| SessionError::Protocol(format!("no record of pulse {i}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bases = states.iter().map(|(b, _)| u8::from(*b == Basis::X)).collect();
        self.send(Payload::BasisAnnounce(BasisAnnounce::Bases(bases)))?;
        let matched = match self.recv()? {
            Payload::BasisAnnounce(BasisAnnounce::Matched(m)) if m.len() == idx.len() => m,
            other => return Err(unexpected("matched flags", &other)),
        };
        for ((_, bit), flag) in states.iter().zip(&matched) {
            if *flag == 1 {
                self.buffer.push(*bit, false);
            }
        }
        Ok(())
    }

    fn alice_frame(&mut self, keep: bool) -> Result<Settled, SessionError> {
        let raw = self
            .buffer
            .pop()
            .ok_or_else(|| SessionError::Protocol("frame announced before the sifted bits".into()))?;
        let mut rec = self.empty_record();
        if !keep {
            rec.status = FrameStatus::DiscardScan;
            return Ok(Settled {
                record: rec,
                amplified: None,
            });
        }
        let sample_seed = self.rng.random();
        let positions = sample_positions(raw.bits.len(), rec.m, sample_seed)?;
        let (key, sample) = split_frame(&raw.bits, &positions)?;
        self.send(Payload::SampleDisclose(SampleDisclose {
            sample_seed,
            bits: sample.clone(),
        }))?;
        let theirs = match self.recv()? {
            Payload::SampleDisclose(s) if s.sample_seed == sample_seed => s.bits,
            other => return Err(unexpected("Bob's sample", &other)),
        };
        let q_rate = self.estimate(&mut rec, &sample, &theirs)?;

        let mut decoded = false;
        for attempt in 0..2u8 {
            let sel = match attempt {
                0 => self.codebook.select_rate(q_rate),
                _ => self.codebook.select_retry(q_rate),
            };
            let sel = match sel {
                Err(LdpcError::UnsupportedQber(_)) => {
                    self.send(Payload::FrameAck(FrameAck::DiscardQber))?;
                    rec.status = FrameStatus::DiscardQber;
                    break;
                }
                other => other?,
            };
            let filler_seed = self.rng.random();
            let adapt = self.codebook.adaptation(&sel, filler_seed)?;
            let fill = self.random_bits(adapt.num_punctured());
            let word = adapt.assemble_word(&key, &fill)?;
            let syndrome = self.codebook.code(sel.code_index)?.code.syndrome(&word)?;
            rec.attempts += 1;
            rec.syndrome_bits += syndrome.len();
            rec.leak_ec += adapt.leak_bits();
            rec.rate = Some(sel.effective_rate);
            self.send(Payload::Syndrome(Syndrome {
                attempt,
                code_index: sel.code_index as u8,
                punctured: sel.punctured as u32,
                shortened: sel.shortened as u32,
                filler_seed,
                syndrome,
            }))?;
            match self.recv_ack()? {
                FrameAck::Decoded => {
                    decoded = true;
                    break;
                }
                FrameAck::DecodeFailed => rec.status = FrameStatus::DecodeFailed,
                other => return Err(unexpected("decode result", &Payload::FrameAck(other))),
            }
        }
        if !decoded {
            return Ok(Settled {
                record: rec,
                amplified: None,
            });
        }
        rec.status = FrameStatus::Ok;

        let vk = VerifyKey {
            k1: self.rng.random(),
            a: self.rng.random(),
        };
        let tag = verify_hash(&key, &vk);
        self.send(Payload::VerifyHash(VerifyHash {
            k1: vk.k1,
            a: vk.a,
            tag,
        }))?;
        match self.recv_ack()? {
            FrameAck::Verified => {}
            FrameAck::VerifyFailed => {
                rec.status = FrameStatus::VerifyFailed;
                return Ok(Settled {
                    record: rec,
                    amplified: None,
                });
            }
            other => return Err(unexpected("verification result", &Payload::FrameAck(other))),
        }

        let l_key = self.bound(&mut rec)?;
        if l_key == 0 {
            rec.status = FrameStatus::NoKey;
            self.send(Payload::FrameAck(FrameAck::NoKey))?;
            return Ok(Settled {
                record: rec,
                amplified: None,
            });
        }
        let out_len = l_key + rec.nu_auth;
        let seed_bits = self.random_bits(key.len() + out_len - 1);
        let seed = ToeplitzSeed::from_bits(key.len(), out_len, seed_bits, self.frame_id)?;
        let amplified = toeplitz_hash(&seed, &key)?;
        self.send(Payload::PaSeed(PaSeed {
            input_len: key.len() as u32,
            output_len: out_len as u32,
            seed: seed.bits,
        }))?;
        Ok(Settled {
            record: rec,
            amplified: Some(amplified),
        })
    }

    fn alice_tags(&mut self) -> Result<(), SessionError> {
        let before = self.ch.transcript().len();
        let theirs = match self.recv()? {
            Payload::AuthTag(t) => t,
            other => return Err(unexpected("Bob's tag", &other)),
        };
        let pad = self.pad()?;
        if !auth_check(&self.ch.transcript()[..before], &theirs, &self.auth_key(), pad) {
            return Err(SessionError::AuthFailure {
                frame_id: self.frame_id,
            });
        }
        let pad = self.pad()?;
        let mine = auth_tag(self.ch.transcript(), &self.auth_key(), pad);
        self.send(Payload::AuthTag(mine))?;
        self.ch.clear_transcript();
        Ok(())
    }

    // ------------------------------------------------------------------ Bob

    fn bob(&mut self, source: &mut dyn ClickSource) -> Result<(), SessionError> {
        self.setup_auth()?;
        self.send(Payload::FrameAck(FrameAck::Hello(self.digest)))?;
        let hello = self.recv()?;
        self.check_hello(hello)?;
        'frames: for _ in 0..self.cfg.frames {
            while self.buffer.buffered() < self.buffer.frame_bits() {
                let Some(clicks) = source.next_chunk(self.cfg.chunk_s) else {
                    log::info!("click source exhausted after {} frames", self.frame_id);
                    break 'frames;
                };
                self.bob_sift(&clicks)?;
            }
            let raw = self.buffer.pop().expect("buffer holds a frame");
            let keep = !raw.discard;
            self.send(Payload::FrameAck(if keep {
                FrameAck::Keep
            } else {
                FrameAck::DiscardScan
            }))?;
            let (settled, inconsistency) = self.bob_frame(&raw.bits, keep)?;
            self.bob_tags()?;
            if let Some(why) = inconsistency {
                return Err(SessionError::Protocol(why));
            }
            self.keep(settled);
            self.frame_id += 1;
            self.report.elapsed_s = source.elapsed_s();
        }
        self.report.elapsed_s = source.elapsed_s();
        let elapsed_ns = (self.report.elapsed_s * 1e9).round() as u64;
        self.send(Payload::FrameAck(FrameAck::Close { elapsed_ns }))?;
        Ok(())
    }

    fn bob_sift(&mut self, clicks: &[crate::sim::ClickRecord]) -> Result<(), SessionError> {
        let detections = resolve_clicks(clicks, self.rng.random());
        if detections.is_empty() {
            return Ok(());
        }
        let idx = detections.iter().map(|d| d.pulse_index).collect();
        self.send(Payload::BasisAnnounce(BasisAnnounce::Detections(idx)))?;
        let bases = match self.recv()? {
            Payload::BasisAnnounce(BasisAnnounce::Bases(b)) if b.len() == detections.len() => b,
            other => return Err(unexpected("Alice's bases", &other)),
        };
        let matched: Vec<u8> = detections
            .iter()
            .zip(&bases)
            .map(|(d, &x)| u8::from((d.basis == Basis::X) == (x == 1)))
            .collect();
        self.send(Payload::BasisAnnounce(BasisAnnounce::Matched(matched.clone())))?;
        for (d, flag) in detections.iter().zip(matched) {
            if flag == 1 {
                self.buffer.push(d.bit, d.during_scan);
            }
        }
        Ok(())
    }

    /// Returns the settled frame and, if the peer's announcements did not
    /// add up, the reason; that is only raised after the tags so that
    /// tampering shows up as an authentication failure.
    fn bob_frame(&mut self, bits: &[u8], keep: bool) -> Result<(Settled, Option<String>), SessionError> {
        let mut rec = self.empty_record();
        if !keep {
            rec.status = FrameStatus::DiscardScan;
            return Ok((
                Settled {
                    record: rec,
                    amplified: None,
                },
                None,
            ));
        }
        let (sample_seed, theirs) = match self.recv()? {
            Payload::SampleDisclose(s) => (s.sample_seed, s.bits),
            other => return Err(unexpected("Alice's sample", &other)),
        };
        let positions = sample_positions(bits.len(), rec.m, sample_seed)?;
        let (key, sample) = split_frame(bits, &positions)?;
        self.send(Payload::SampleDisclose(SampleDisclose {
            sample_seed,
            bits: sample.clone(),
        }))?;
        let q_rate = self.estimate(&mut rec, &sample, &theirs)?;
        let llr_q = q_rate.clamp(1e-3, 0.25);

        let mut corrected = None;
        for attempt in 0..2u8 {
            let s = match self.recv()? {
                Payload::FrameAck(FrameAck::DiscardQber) => {
                    rec.status = FrameStatus::DiscardQber;
                    break;
                }
                Payload::Syndrome(s) if s.attempt == attempt => s,
                other => return Err(unexpected("syndrome", &other)),
            };
            let sel = self
                .codebook
                .selection(s.code_index as usize, s.punctured as usize, s.shortened as usize)
                .map_err(|e| SessionError::Protocol(format!("announced rate: {e}")))?;
            let adapt = self.codebook.adaptation(&sel, s.filler_seed)?;
            rec.attempts += 1;
            rec.syndrome_bits += s.syndrome.len();
            rec.leak_ec += adapt.leak_bits();
            rec.rate = Some(sel.effective_rate);
            let base = self.codebook.code(sel.code_index)?;
            let decoder = self
                .decoders
                .entry(sel.code_index)
                .or_insert_with(|| Decoder::new(&base.code));
            let out = decoder
                .decode(&adapt, &key, &s.syndrome, llr_q, self.codebook.config().max_iters)
                .map_err(|e| SessionError::Protocol(format!("syndrome: {e}")))?;
            if out.converged {
                corrected = out.corrected;
                self.send(Payload::FrameAck(FrameAck::Decoded))?;
                break;
            }
            rec.status = FrameStatus::DecodeFailed;
            self.send(Payload::FrameAck(FrameAck::DecodeFailed))?;
        }
        let Some(corrected) = corrected else {
            return Ok((
                Settled {
                    record: rec,
                    amplified: None,
                },
                None,
            ));
        };
        rec.status = FrameStatus::Ok;
        rec.corrected_errors = Some(crate::bits::hamming(&key, &corrected));

        let vh = match self.recv()? {
            Payload::VerifyHash(v) => v,
            other => return Err(unexpected("verification hash", &other)),
        };
        let ok = verify_hash(&corrected, &VerifyKey { k1: vh.k1, a: vh.a }) == vh.tag;
        self.send(Payload::FrameAck(if ok {
            FrameAck::Verified
        } else {
            FrameAck::VerifyFailed
        }))?;
        if !ok {
            rec.status = FrameStatus::VerifyFailed;
            return Ok((
                Settled {
                    record: rec,
                    amplified: None,
                },
                None,
            ));
        }

        let l_key = self.bound(&mut rec)?;
        let expected = l_key + rec.nu_auth;
        match self.recv()? {
            Payload::FrameAck(FrameAck::NoKey) => {
                rec.status = FrameStatus::NoKey;
                let why = (l_key > 0).then(|| format!("peer extracted no key where {l_key} bits are due"));
                Ok((
                    Settled {
                        record: rec,
                        amplified: None,
                    },
                    why,
                ))
            }
            Payload::PaSeed(p) => {
                if l_key == 0 || p.input_len as usize != key.len() || p.output_len as usize != expected {
                    let why = format!(
                        "peer amplifies {} -> {} bits, expected {} -> {expected}",
                        p.input_len,
                        p.output_len,
                        key.len()
                    );
                    rec.status = FrameStatus::NoKey;
                    return Ok((
                        Settled {
                            record: rec,
                            amplified: None,
                        },
                        Some(why),
                    ));
                }
                let seed = ToeplitzSeed::from_bits(key.len(), expected, p.seed, self.frame_id)?;
                let amplified = toeplitz_hash(&seed, &corrected)?;
                Ok((
                    Settled {
                        record: rec,
                        amplified: Some(amplified),
                    },
                    None,
                ))
            }
            other => Err(unexpected("amplification seed", &other)),
        }
    }

    fn bob_tags(&mut self) -> Result<(), SessionError> {
        let pad = self.pad()?;
        let mine = auth_tag(self.ch.transcript(), &self.auth_key(), pad);
        self.send(Payload::AuthTag(mine))?;
        let before = self.ch.transcript().len();
        let theirs = match self.recv()? {
            Payload::AuthTag(t) => t,
            other => return Err(unexpected("Alice's tag", &other)),
        };
        let pad = self.pad()?;
        if !auth_check(&self.ch.transcript()[..before], &theirs, &self.auth_key(), pad) {
            return Err(SessionError::AuthFailure {
                frame_id: self.frame_id,
            });
        }
        self.ch.clear_transcript();
        Ok(())
    }
}

fn unexpected(wanted: &str, got: &Payload) -> SessionError {
    SessionError::Protocol(format!("expected {wanted}, got {:?}", got.kind()))
}
