//! Run traces: one line per protocol step, stable format
//! `<tick>\t<actor>\t<event>\t<k=v;...>`. Determinism tests compare these
//! byte for byte across runs.

use crate::clock::Tick;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: Tick,
    pub actor: String,
    pub code: String,
    pub details: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn emit(&mut self, tick: Tick, actor: &str, code: &str, details: &[(&str, String)]) {
        self.events.push(TraceEvent {
            tick,
            actor: actor.to_string(),
            code: code.to_string(),
            details: details
                .iter()
                .map(|(k, v)| (k.to_string(), sanitize(v)))
                .collect(),
        });
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.tick.to_string());
            out.push('\t');
            out.push_str(&e.actor);
            out.push('\t');
            out.push_str(&e.code);
            out.push('\t');
            let kv: Vec<String> = e.details.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&kv.join(";"));
            out.push('\n');
        }
        out
    }
}

fn sanitize(v: &str) -> String {
    v.replace(['\t', '\n', ';'], "_")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_tab_separated_lines() {
        let mut t = Trace::new();
        t.emit(3, "bankA", "case.state", &[("state", "Screened".into())]);
        t.emit(3, "bankA", "risk.assessed", &[("score", "30".into()), ("level", "standard".into())]);
        assert_eq!(
            t.render(),
            "3\tbankA\tcase.state\tstate=Screened\n3\tbankA\trisk.assessed\tscore=30;level=standard\n"
        );
    }

    #[test]
    fn control_characters_sanitized() {
        let mut t = Trace::new();
        t.emit(0, "x", "c", &[("v", "a\tb;c".into())]);
        assert_eq!(t.render(), "0\tx\tc\tv=a_b_c\n");
    }
}
