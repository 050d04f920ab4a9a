use super::messages::{Abort, AbortCode, Payload};
use super::wire::{encode_message, read_message, SequenceCheck, WireMessage};
use super::{SessionError, Transport};

/// A transport with sequence numbering, transcript recording and the
/// abort discipline.
pub(crate) struct Channel<T> {
    t: T,
    next_seq: u64,
    incoming: SequenceCheck,
    transcript: Vec<u8>,
    aborted: bool,
}

impl<T: Transport> Channel<T> {
    pub(crate) fn new(t: T) -> Self {
        Self {
            t,
            next_seq: 0,
            incoming: SequenceCheck::default(),
            transcript: Vec::new(),
            aborted: false,
        }
    }

    fn write(&mut self, frame_id: u64, payload: &Payload) -> Result<Vec<u8>, SessionError> {
        let msg = WireMessage {
            kind: payload.kind(),
            frame_id,
            seq: self.next_seq,
            payload: payload.encode(),
        };
        self.next_seq += 1;
        let bytes = encode_message(&msg);
        self.t.write_all(&bytes).map_err(|e| SessionError::Io(e.to_string()))?;
        self.t.flush().map_err(|e| SessionError::Io(e.to_string()))?;
        Ok(bytes)
    }

    pub(crate) fn send(&mut self, frame_id: u64, payload: Payload) -> Result<(), SessionError> {
        if self.aborted {
            return Err(SessionError::Protocol("send after abort".into()));
        }
        let bytes = self.write(frame_id, &payload)?;
        self.transcript.extend_from_slice(&bytes);
        Ok(())
    }

    /// Next message; an `ABORT` from the peer becomes an error.
    pub(crate) fn recv(&mut self) -> Result<(u64, Payload), SessionError> {
        let msg = read_message(&mut self.t)?;
        self.incoming.accept(msg.seq)?;
        let payload = Payload::decode(msg.kind, &msg.payload)?;
        if let Payload::Abort(a) = payload {
            return Err(SessionError::PeerAbort(a));
        }
        self.transcript.extend_from_slice(&encode_message(&msg));
        Ok((msg.frame_id, payload))
    }

    /// Receives a message that must belong to `frame_id`.
    pub(crate) fn recv_in(&mut self, frame_id: u64) -> Result<Payload, SessionError> {
        let (fid, p) = self.recv()?;
        if fid != frame_id {
            return Err(SessionError::Protocol(format!(
                "message for frame {fid} during frame {frame_id}"
            )));
        }
        Ok(p)
    }

    pub(crate) fn transcript(&self) -> &[u8] {
        &self.transcript
    }

    pub(crate) fn clear_transcript(&mut self) {
        self.transcript.clear();
    }

    /// Sends `ABORT` on a best-effort basis and closes the transport.
    pub(crate) fn abort(&mut self, frame_id: u64, code: AbortCode, reason: &str) {
        if !self.aborted {
            self.aborted = true;
            let _ = self.write(
                frame_id,
                &Payload::Abort(Abort {
                    code,
                    reason: reason.to_string(),
                }),
            );
        }
        self.t.shutdown();
    }

    pub(crate) fn close(&mut self) {
        self.t.shutdown();
    }
}
