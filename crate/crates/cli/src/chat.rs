//! Terminal conversation loop.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use dialplan_core::executor::Speaker;
use dialplan_core::session::{build_engine, Session, Status};
use dialplan_core::trace::StepRecord;

use crate::{emit, input, Failure};

pub(crate) fn chat(
    spec: &str,
    script: Option<&Path>,
    trace: Option<&Path>,
    verbose: bool,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let engine = Arc::new(build_engine(&input::load_spec_arg(spec)?)?);
    let mut session = Session::new(engine);
    if let Some(p) = trace {
        let f = File::create(p).map_err(|e| Failure::io(p, e))?;
        session = session.with_sink(Box::new(f));
    }
    let mut file;
    let lines: &mut dyn BufRead = match script {
        Some(p) => {
            file = BufReader::new(File::open(p).map_err(|e| Failure::io(p, e))?);
            &mut file
        }
        None => stdin,
    };
    let exec = |e: dialplan_core::session::SessionError| Failure::error("execution", e.to_string());

    let mut status = session.run().map_err(exec)?;
    show(session.trace(), false, verbose, out)?;
    loop {
        let prompt = match status {
            Status::Complete => {
                return emit(out, format!("-- conversation complete after {} steps", session.trace().len()));
            }
            Status::Awaiting { prompt, .. } => prompt,
        };
        emit(out, format!("agent> {prompt}"))?;
        let mut line = String::new();
        let n = lines.read_line(&mut line).map_err(|e| Failure::error("io", e.to_string()))?;
        if n == 0 {
            return Err(Failure::error("input-ended", "input ended before the conversation completed")
                .with_details(serde_json::json!({ "steps": session.trace().len() })));
        }
        let text = line.trim_end_matches(['\r', '\n']);
        if script.is_some() {
            emit(out, format!("user> {text}"))?;
        }
        let before = session.trace().len();
        let r = session.reply(text);
        show(&session.trace()[before..], true, verbose, out)?;
        status = r.map_err(exec)?;
    }
}

/// Prints agent turns of auto-executed steps. With `skip_first`, the first
/// record is the reply step whose turns were already shown.
fn show(records: &[StepRecord], skip_first: bool, verbose: bool, out: &mut dyn Write) -> Result<(), Failure> {
    for (i, r) in records.iter().enumerate() {
        if verbose {
            emit(out, format!("   [{}] n{} {} -> n{} via {}", r.step, r.node, r.action, r.next_node, r.outcome))?;
        }
        if skip_first && i == 0 {
            continue;
        }
        for u in r.utterances.iter().filter(|u| u.speaker == Speaker::Agent) {
            emit(out, format!("agent> {}", u.text))?;
        }
    }
    Ok(())
}
