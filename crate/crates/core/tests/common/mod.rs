//! Minimal HTTP/1.1 chat-completions stand-in for protocol tests.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct Recorded {
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: Value,
}

impl Recorded {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }
}

type Responder = dyn Fn(&Value, usize) -> (u16, String) + Send + Sync;

pub struct MockServer {
    pub base_url: String,
    pub requests: Arc<Mutex<Vec<Recorded>>>,
}

impl MockServer {
    /// Serves every request with `respond(body, request_number)`.
    pub fn start(respond: impl Fn(&Value, usize) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let respond: Arc<Responder> = Arc::new(respond);
        let log = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let log = log.clone();
                let respond = respond.clone();
                thread::spawn(move || serve(stream, &log, respond.as_ref()));
            }
        });
        Self { base_url, requests }
    }

    pub fn requests(&self) -> Vec<Recorded> {
        self.requests.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, log: &Mutex<Vec<Recorded>>, respond: &Responder) {
    let mut writer = stream.try_clone().expect("clone");
    let mut reader = BufReader::new(stream);
    loop {
        let mut request_line = String::new();
        if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
            return;
        }
        let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
        let mut headers = Vec::new();
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line).unwrap_or(0) == 0 {
                return;
            }
            let line = line.trim_end();
            if line.is_empty() {
                break;
            }
            if let Some((k, v)) = line.split_once(':') {
                headers.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let length: usize = headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
            .and_then(|(_, v)| v.parse().ok())
            .unwrap_or(0);
        let mut body = vec![0u8; length];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
        let number = {
            let mut log = log.lock().unwrap();
            log.push(Recorded { path, headers, body: body.clone() });
            log.len() - 1
        };
        let (status, text) = respond(&body, number);
        let response = format!(
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{text}",
            text.len()
        );
        if writer.write_all(response.as_bytes()).is_err() {
            return;
        }
    }
}

pub fn completion(message: Value) -> String {
    json!({
        "id": "chatcmpl-mock",
        "object": "chat.completion",
        "choices": [{ "index": 0, "message": message, "finish_reason": "stop" }]
    })
    .to_string()
}

pub fn text_completion(text: &str) -> String {
    completion(json!({ "role": "assistant", "content": text }))
}

pub fn call_completion(id: &str, name: &str, arguments: Value) -> String {
    completion(json!({
        "role": "assistant",
        "content": null,
        "tool_calls": [{ "id": id, "type": "function", "function": { "name": name, "arguments": arguments.to_string() } }]
    }))
}

/// A scripted "model" that solves Fetch instances from the wire messages alone:
/// it reads the instruction, counts its own earlier calls and answers with the
/// next step. Text is returned when the last message asks for a plan or reasoning.
pub fn fetch_solver(body: &Value, _number: usize) -> (u16, String) {
    let messages = body["messages"].as_array().cloned().unwrap_or_default();
    let Some(start) = messages.iter().rposition(|m| {
        m["role"] == "user" && m["content"].as_str().is_some_and(|c| c.starts_with("Please get me a "))
    }) else {
        return (400, json!({ "error": { "message": "no fetch instruction" } }).to_string());
    };
    let instruction = messages[start]["content"].as_str().unwrap();
    let rest = instruction.trim_start_matches("Please get me a ").trim_end_matches('.');
    let (object, room) = rest.split_once(" from the ").expect("fetch instruction shape");
    let last = messages.last().unwrap();
    if last["role"] == "system" && last["content"].as_str().is_some_and(|c| c.starts_with("Briefly")) {
        return (200, text_completion("Drive there, find it, grasp it, bring it back, place it, exit."));
    }
    let step = messages[start..].iter().filter(|m| m["tool_calls"].is_array()).count();
    let (name, arguments) = match step {
        0 => ("drive_to_location", json!({ "location": room })),
        1 => ("find_object", json!({ "object_name_list": [object] })),
        2 => ("grasp_object", json!({ "object_name": object })),
        3 => ("drive_to_location", json!({ "location": "parlor" })),
        4 => ("place_object", json!({ "object_name": object })),
        _ => ("exit", json!({})),
    };
    (200, call_completion(&format!("call_{step}"), name, arguments))
}
