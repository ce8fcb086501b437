//! Transports for a session. Inbound lines are decoded by a reader (a
//! thread for TCP, the client handle in memory) and dropped into a
//! [`Mailbox`]; the session loop is the single consumer.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{decode, encode, Action, DecodeError, SessionMessage};

/// Non-action messages kept while the session loop is busy; older ones are
/// dropped first.
const CONTROL_CAPACITY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Message(SessionMessage),
    Malformed(DecodeError),
    /// An action arrived (only reported when waiting for one).
    Action(Action),
    /// The deadline passed; carries the latest action received, if any.
    Deadline(Option<Action>),
    Closed,
}

#[derive(Default)]
struct Slots {
    action: Option<Action>,
    control: VecDeque<Event>,
    closed: bool,
}

/// Latest-wins action slot plus a bounded queue for everything else.
#[derive(Default)]
pub struct Mailbox {
    slots: Mutex<Slots>,
    ready: Condvar,
}

impl Mailbox {
    pub fn push_line(&self, line: &str) {
        let ev = match decode(line) {
            Ok(SessionMessage::Action(a)) => {
                self.slots.lock().unwrap().action = Some(a);
                self.ready.notify_all();
                return;
            }
            Ok(m) => Event::Message(m),
            Err(e) => Event::Malformed(e),
        };
        let mut s = self.slots.lock().unwrap();
        if s.control.len() == CONTROL_CAPACITY {
            s.control.pop_front();
        }
        s.control.push_back(ev);
        self.ready.notify_all();
    }

    pub fn close(&self) {
        self.slots.lock().unwrap().closed = true;
        self.ready.notify_all();
    }

    pub fn clear_action(&self) {
        self.slots.lock().unwrap().action = None;
    }

    /// Next event before `deadline`. Queued messages come first. With
    /// `early`, a pending action is returned as soon as it is there;
    /// otherwise actions accumulate (latest wins) until the deadline.
    pub fn next(&self, deadline: Instant, early: bool) -> Event {
        let mut s = self.slots.lock().unwrap();
        loop {
            if let Some(ev) = s.control.pop_front() {
                return ev;
            }
            if early {
                if let Some(a) = s.action.take() {
                    return Event::Action(a);
                }
            }
            if s.closed {
                return Event::Closed;
            }
            let now = Instant::now();
            if now >= deadline {
                return Event::Deadline(s.action.take());
            }
            s = self.ready.wait_timeout(s, deadline - now).unwrap().0;
        }
    }
}

pub trait Channel {
    fn send(&mut self, msg: &SessionMessage) -> io::Result<()>;
    fn mailbox(&self) -> &Mailbox;
    /// Waits until `deadline` for a peer to take over a dropped connection.
    fn reconnect(&mut self, deadline: Instant) -> bool;
}

/// Server end of an in-process connection.
pub struct MemoryChannel {
    mailbox: Arc<Mailbox>,
    outbox: mpsc::Sender<String>,
}

/// Client end of an in-process connection. Traffic is encoded to lines in
/// both directions, exactly as on a socket.
pub struct MemoryClient {
    mailbox: Arc<Mailbox>,
    inbox: mpsc::Receiver<String>,
}

pub fn memory_pair() -> (MemoryChannel, MemoryClient) {
    let mailbox = Arc::new(Mailbox::default());
    let (tx, rx) = mpsc::channel();
    (
        MemoryChannel {
            mailbox: mailbox.clone(),
            outbox: tx,
        },
        MemoryClient { mailbox, inbox: rx },
    )
}

impl Channel for MemoryChannel {
    fn send(&mut self, msg: &SessionMessage) -> io::Result<()> {
        self.outbox
            .send(encode(msg))
            .map_err(|_| io::Error::from(io::ErrorKind::BrokenPipe))
    }

    fn mailbox(&self) -> &Mailbox {
        &self.mailbox
    }

    fn reconnect(&mut self, _deadline: Instant) -> bool {
        false
    }
}

impl MemoryClient {
    pub fn send(&self, msg: &SessionMessage) {
        self.mailbox.push_line(&encode(msg));
    }

    /// Sends raw text as one line.
    pub fn send_raw(&self, line: &str) {
        self.mailbox.push_line(line);
    }

    pub fn recv(&self, timeout: Duration) -> Option<SessionMessage> {
        let line = self.inbox.recv_timeout(timeout).ok()?;
        Some(decode(&line).expect("server sends valid lines"))
    }
}

impl Drop for MemoryClient {
    fn drop(&mut self) {
        self.mailbox.close();
    }
}

/// One client at a time over TCP; a later client may pick up a session
/// whose connection dropped.
pub struct TcpChannel {
    listener: TcpListener,
    mailbox: Arc<Mailbox>,
    writer: Option<TcpStream>,
}

impl TcpChannel {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            mailbox: Arc::new(Mailbox::default()),
            writer: None,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Blocks until a client connects, or until `deadline` if given.
    pub fn accept(&mut self, deadline: Option<Instant>) -> io::Result<bool> {
        self.listener.set_nonblocking(deadline.is_some())?;
        let stream = loop {
            match self.listener.accept() {
                Ok((s, peer)) => {
                    log::info!("client connected from {peer}");
                    break s;
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                    if deadline.is_some_and(|d| Instant::now() >= d) {
                        return Ok(false);
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(e),
            }
        };
        stream.set_nonblocking(false)?;
        stream.set_nodelay(true)?;
        // A fresh mailbox per connection, so a dying reader cannot close
        // its successor's.
        self.mailbox = Arc::new(Mailbox::default());
        let reader = stream.try_clone()?;
        let mailbox = self.mailbox.clone();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                match line {
                    Ok(l) if l.trim().is_empty() => continue,
                    Ok(l) => mailbox.push_line(&l),
                    Err(_) => break,
                }
            }
            mailbox.close();
        });
        self.writer = Some(stream);
        Ok(true)
    }

    /// Drops the current client, if any.
    pub fn hang_up(&mut self) {
        if let Some(w) = self.writer.take() {
            let _ = w.shutdown(std::net::Shutdown::Both);
        }
    }
}

impl Channel for TcpChannel {
    fn send(&mut self, msg: &SessionMessage) -> io::Result<()> {
        let w = self
            .writer
            .as_mut()
            .ok_or_else(|| io::Error::from(io::ErrorKind::NotConnected))?;
        let mut line = encode(msg);
        line.push('\n');
        w.write_all(line.as_bytes())
    }

    fn mailbox(&self) -> &Mailbox {
        &self.mailbox
    }

    fn reconnect(&mut self, deadline: Instant) -> bool {
        self.hang_up();
        matches!(self.accept(Some(deadline)), Ok(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn action(ux: f64) -> String {
        encode(&SessionMessage::Action(Action { ux, uy: 0.0, t: None }))
    }

    #[test]
    fn latest_action_wins_at_the_deadline() {
        let m = Mailbox::default();
        m.push_line(&action(0.1));
        m.push_line(&action(0.2));
        m.push_line("garbage");
        let soon = Instant::now() + Duration::from_millis(5);
        assert!(matches!(m.next(soon, false), Event::Malformed(_)));
        match m.next(soon, false) {
            Event::Deadline(Some(a)) => assert_eq!(a.ux, 0.2),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.next(Instant::now(), false), Event::Deadline(None));
    }

    #[test]
    fn early_mode_returns_on_arrival() {
        let m = Arc::new(Mailbox::default());
        let m2 = m.clone();
        let h = thread::spawn(move || {
            thread::sleep(Duration::from_millis(20));
            m2.push_line(&action(0.5));
        });
        let far = Instant::now() + Duration::from_secs(10);
        match m.next(far, true) {
            Event::Action(a) => assert_eq!(a.ux, 0.5),
            other => panic!("{other:?}"),
        }
        h.join().unwrap();
        m.close();
        assert_eq!(m.next(far, true), Event::Closed);
    }

    #[test]
    fn control_queue_is_bounded() {
        let m = Mailbox::default();
        for _ in 0..CONTROL_CAPACITY + 10 {
            m.push_line("{}");
        }
        let mut n = 0;
        while let Event::Malformed(_) = m.next(Instant::now(), false) {
            n += 1;
        }
        assert_eq!(n, CONTROL_CAPACITY);
    }
}
