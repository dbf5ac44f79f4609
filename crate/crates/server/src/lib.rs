//! Socket transport for the stepping protocol.
//!
//! Every connection gets its own [`Session`] on its own thread. Messages are
//! JSON documents framed by a 4-byte big-endian length. A connection whose
//! first bytes are `GET` is treated as an HTTP upgrade and then speaks the
//! same protocol as WebSocket text messages, one request per message.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;

use iternet::session::{Flow, Session};
use serde_json::json;
use tungstenite::Message;

/// Frames larger than this are refused and the connection is closed.
pub const MAX_FRAME: u32 = 64 << 20;

pub struct Server {
    listener: TcpListener,
    preload: Option<String>,
}

impl Server {
    /// Binds to `addr`. When `preload` is given every new session starts with
    /// that program loaded at revision 0.
    pub fn bind(addr: impl ToSocketAddrs, preload: Option<String>) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            preload,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let preload = self.preload.clone();
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                log::info!("connection from {peer:?}");
                if let Err(e) = serve_connection(stream, preload.as_deref()) {
                    log::info!("connection {peer:?} ended: {e}");
                }
            });
        }
        Ok(())
    }
}

fn new_session(preload: Option<&str>) -> Session {
    let mut session = Session::new();
    if let Some(source) = preload {
        let (resp, _) = session.handle(&json!({ "cmd": "load", "source": source }));
        if resp["ok"] != true {
            log::warn!("preload failed: {}", resp["error"]);
        }
    }
    session
}

/// Runs one session over `stream` until the peer quits or disconnects.
pub fn serve_connection(stream: TcpStream, preload: Option<&str>) -> io::Result<()> {
    let mut head = [0u8; 3];
    let n = stream.peek(&mut head)?;
    if n == 3 && &head == b"GET" {
        serve_websocket(stream, preload)
    } else {
        serve_framed(stream, preload)
    }
}

pub fn read_frame(r: &mut impl Read) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes"),
        ));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

fn serve_framed(mut stream: TcpStream, preload: Option<&str>) -> io::Result<()> {
    let mut session = new_session(preload);
    while let Some(frame) = read_frame(&mut stream)? {
        let text = String::from_utf8_lossy(&frame);
        let (resp, flow) = session.handle_text(&text);
        write_frame(&mut stream, resp.as_bytes())?;
        if flow == Flow::Quit {
            break;
        }
    }
    Ok(())
}

fn serve_websocket(stream: TcpStream, preload: Option<&str>) -> io::Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    let mut session = new_session(preload);
    loop {
        let msg = match ws.read() {
            Ok(m) => m,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                return Ok(())
            }
            Err(e) => return Err(io::Error::other(e.to_string())),
        };
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        let (resp, flow) = session.handle_text(&text);
        ws.send(Message::text(resp))
            .map_err(|e| io::Error::other(e.to_string()))?;
        if flow == Flow::Quit {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"{\"cmd\":\"quit\"}").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 14]);
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"{\"cmd\":\"quit\"}");
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn oversized_frames_are_refused() {
        let mut r = &(MAX_FRAME + 1).to_be_bytes()[..];
        assert!(read_frame(&mut r).is_err());
    }
}
