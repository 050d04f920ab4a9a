//! Reliable ordered byte streams for the classical channel.

use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

/// A duplex byte stream that can be closed from either end.
pub trait Transport: Read + Write + Send {
    /// Closes both directions; the peer sees end of stream.
    fn shutdown(&mut self);
}

impl Transport for TcpStream {
    fn shutdown(&mut self) {
        let _ = TcpStream::shutdown(self, Shutdown::Both);
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn shutdown(&mut self) {
        (**self).shutdown()
    }
}

/// One end of an in-memory duplex pipe.
#[derive(Debug)]
pub struct MemoryPipe {
    tx: Option<Sender<Vec<u8>>>,
    rx: Receiver<Vec<u8>>,
    pending: Vec<u8>,
    pos: usize,
    timeout: Duration,
}

/// Two connected pipe ends. Reads block for at most `timeout`.
pub fn memory_duplex(timeout: Duration) -> (MemoryPipe, MemoryPipe) {
    let (atx, brx) = mpsc::channel();
    let (btx, arx) = mpsc::channel();
    let end = |tx, rx| MemoryPipe {
        tx: Some(tx),
        rx,
        pending: Vec::new(),
        pos: 0,
        timeout,
    };
    (end(atx, arx), end(btx, brx))
}

impl Read for MemoryPipe {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        if buf.is_empty() {
            return Ok(0);
        }
        while self.pos == self.pending.len() {
            match self.rx.recv_timeout(self.timeout) {
                Ok(chunk) => {
                    self.pending = chunk;
                    self.pos = 0;
                }
                Err(RecvTimeoutError::Disconnected) => return Ok(0),
                Err(RecvTimeoutError::Timeout) => return Err(io::Error::new(io::ErrorKind::TimedOut, "peer silent")),
            }
        }
        let n = buf.len().min(self.pending.len() - self.pos);
        buf[..n].copy_from_slice(&self.pending[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

impl Write for MemoryPipe {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let tx = self
            .tx
            .as_ref()
            .ok_or_else(|| io::Error::new(io::ErrorKind::BrokenPipe, "pipe closed"))?;
        tx.send(buf.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer gone"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Transport for MemoryPipe {
    fn shutdown(&mut self) {
        self.tx = None;
    }
}

/// What an [`Interceptor`] does with one outgoing message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intercept {
    Forward,
    Drop,
    /// Closes the connection instead of sending.
    Close,
}

/// A man in the middle on the outgoing direction of a transport.
///
/// Outgoing bytes are cut into whole messages using the length prefix and
/// each encoded message is handed to the callback, which may rewrite it.
pub struct Interceptor<T, F> {
    inner: T,
    hook: F,
    buf: Vec<u8>,
    closed: bool,
}

impl<T, F> Interceptor<T, F>
where
    T: Transport,
    F: FnMut(&mut Vec<u8>) -> Intercept + Send,
{
    pub fn new(inner: T, hook: F) -> Self {
        Self {
            inner,
            hook,
            buf: Vec::new(),
            closed: false,
        }
    }

    fn drain(&mut self) -> io::Result<()> {
        loop {
            if self.buf.len() < 4 {
                return Ok(());
            }
            let len = u32::from_be_bytes(self.buf[..4].try_into().expect("4 bytes")) as usize;
            if self.buf.len() < 4 + len {
                return Ok(());
            }
            let mut msg: Vec<u8> = self.buf.drain(..4 + len).collect();
            match (self.hook)(&mut msg) {
                Intercept::Forward => self.inner.write_all(&msg)?,
                Intercept::Drop => {}
                Intercept::Close => {
                    self.closed = true;
                    self.inner.shutdown();
                    return Err(io::Error::new(io::ErrorKind::BrokenPipe, "connection cut"));
                }
            }
        }
    }
}

impl<T: Transport, F> Read for Interceptor<T, F> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        self.inner.read(buf)
    }
}

impl<T, F> Write for Interceptor<T, F>
where
    T: Transport,
    F: FnMut(&mut Vec<u8>) -> Intercept + Send,
{
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if self.closed {
            return Err(io::Error::new(io::ErrorKind::BrokenPipe, "connection cut"));
        }
        self.buf.extend_from_slice(buf);
        self.drain()?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl<T, F> Transport for Interceptor<T, F>
where
    T: Transport,
    F: FnMut(&mut Vec<u8>) -> Intercept + Send,
{
    fn shutdown(&mut self) {
        self.closed = true;
        self.inner.shutdown();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipe_carries_bytes_and_reports_close() {
        let (mut a, mut b) = memory_duplex(Duration::from_secs(1));
        a.write_all(b"hello").unwrap();
        let mut buf = [0u8; 5];
        b.read_exact(&mut buf).unwrap();
        assert_eq!(&buf, b"hello");
        a.shutdown();
        assert_eq!(b.read(&mut buf).unwrap(), 0);
    }
}
