use std::net::TcpStream;
use std::thread;

use iternet_server::{read_frame, write_frame, Server};
use serde_json::{json, Value};

fn start(preload: Option<&str>) -> std::net::SocketAddr {
    let server = Server::bind("127.0.0.1:0", preload.map(String::from)).unwrap();
    let addr = server.local_addr().unwrap();
    thread::spawn(move || server.run());
    addr
}

fn call(stream: &mut TcpStream, req: &str) -> Value {
    write_frame(stream, req.as_bytes()).unwrap();
    let resp = read_frame(stream).unwrap().expect("response");
    serde_json::from_slice(&resp).unwrap()
}

#[test]
fn sessions_are_independent() {
    let addr = start(None);
    let mut a = TcpStream::connect(addr).unwrap();
    let mut b = TcpStream::connect(addr).unwrap();
    let load = json!({"cmd":"load","source":"(\\x:nat. x) 0"}).to_string();
    assert_eq!(call(&mut a, &load)["rev"], 0);
    assert_eq!(call(&mut b, &load)["rev"], 0);
    let r = call(&mut a, r#"{"rev":0,"cmd":"step","pair_index":0}"#);
    assert_eq!(r["rev"], 1);
    let r = call(&mut b, r#"{"cmd":"snapshot"}"#);
    assert_eq!(r["rev"], 0);
    let r = call(&mut b, r#"{"rev":0,"cmd":"run","to_normal":true}"#);
    assert_eq!(r["normal"], true);
    assert_eq!(call(&mut b, r#"{"cmd":"readback"}"#)["term"], "0");
    assert_eq!(call(&mut a, r#"{"cmd":"snapshot"}"#)["rev"], 1);
}

#[test]
fn malformed_json_gets_an_error_and_the_connection_survives() {
    let addr = start(Some("true"));
    let mut s = TcpStream::connect(addr).unwrap();
    let r = call(&mut s, "{oops");
    assert_eq!(r["ok"], false);
    assert!(r["error"]
        .as_str()
        .unwrap()
        .starts_with("malformed request"));
    let r = call(&mut s, r#"{"cmd":"pairs"}"#);
    assert_eq!(r["pairs"].as_array().unwrap().len(), 1);
}

#[test]
fn quit_closes_the_connection() {
    let addr = start(None);
    let mut s = TcpStream::connect(addr).unwrap();
    call(&mut s, r#"{"cmd":"load","source":"0"}"#);
    assert_eq!(call(&mut s, r#"{"cmd":"quit"}"#)["bye"], true);
    assert!(read_frame(&mut s).unwrap().is_none());
}

#[test]
fn websocket_clients_speak_the_same_protocol() {
    let addr = start(Some("0"));
    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}/")).unwrap();
    ws.send(tungstenite::Message::text(r#"{"cmd":"pairs"}"#))
        .unwrap();
    let msg = ws.read().unwrap();
    let r: Value = serde_json::from_str(msg.to_text().unwrap()).unwrap();
    assert_eq!(r["pairs"][0]["symbols"], json!(["zero", "tok"]));
    ws.send(tungstenite::Message::text(r#"{"cmd":"quit"}"#))
        .unwrap();
    let r: Value = serde_json::from_str(ws.read().unwrap().to_text().unwrap()).unwrap();
    assert_eq!(r["bye"], true);
}
