use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{AliceMove, GameParams};
use crate::geometry::Ball;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mover {
    Bob,
    Alice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    Bob(Ball),
    Alice(AliceMove),
}

/// One move. Bob's `B_i` and Alice's reply to it share round index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub round: usize,
    pub entry: Entry,
}

impl MoveRecord {
    pub fn mover(&self) -> Mover {
        match self.entry {
            Entry::Bob(_) => Mover::Bob,
            Entry::Alice(_) => Mover::Alice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AliceCertified,
    Undetermined,
}

/// How play stopped. Illegal moves are kept here, not in the move list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    AliceForfeit { round: usize, reason: String, attempted: AliceMove },
    BobForfeit { round: usize, reason: String, attempted: Option<Ball> },
    BobResigned { round: usize },
    BobStuck { round: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTranscript {
    pub params: GameParams,
    pub moves: Vec<MoveRecord>,
    pub final_ball: Option<Ball>,
    pub verdict: Verdict,
    pub verdict_evidence: Value,
    pub termination: Termination,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("transcript is missing its {0} line")]
    Missing(&'static str),
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    params: GameParams,
}

#[derive(Deserialize)]
struct MoveLine {
    round: usize,
    mover: Mover,
    #[serde(rename = "move")]
    mv: Value,
}

#[derive(Serialize)]
#[serde(untagged)]
enum MoveRef<'a> {
    Bob(&'a Ball),
    Alice(&'a AliceMove),
}

#[derive(Serialize)]
struct MoveLineRef<'a> {
    round: usize,
    mover: Mover,
    #[serde(rename = "move")]
    mv: MoveRef<'a>,
}

#[derive(Serialize, Deserialize)]
struct FinalLine {
    final_ball: Option<Ball>,
    verdict: Verdict,
    termination: Termination,
    evidence: Value,
}

impl GameTranscript {
    /// Bob's balls in order, `B_0` first.
    pub fn bob_balls(&self) -> impl Iterator<Item = &Ball> {
        self.moves.iter().filter_map(|m| match &m.entry {
            Entry::Bob(b) => Some(b),
            Entry::Alice(_) => None,
        })
    }

    pub fn alice_moves(&self) -> impl Iterator<Item = (usize, &AliceMove)> {
        self.moves.iter().filter_map(|m| match &m.entry {
            Entry::Alice(a) => Some((m.round, a)),
            Entry::Bob(_) => None,
        })
    }

    /// Line-delimited JSON: a parameter header, one line per move, a verdict line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, v: String| {
            out.push_str(&v);
            out.push('\n');
        };
        push(&mut out, serde_json::to_string(&HeaderLine { params: self.params.clone() }).expect("serializable"));
        for m in &self.moves {
            let mv = match &m.entry {
                Entry::Bob(b) => MoveRef::Bob(b),
                Entry::Alice(a) => MoveRef::Alice(a),
            };
            let line = MoveLineRef { round: m.round, mover: m.mover(), mv };
            push(&mut out, serde_json::to_string(&line).expect("serializable"));
        }
        let fin = FinalLine {
            final_ball: self.final_ball.clone(),
            verdict: self.verdict,
            termination: self.termination.clone(),
            evidence: self.verdict_evidence.clone(),
        };
        push(&mut out, serde_json::to_string(&fin).expect("serializable"));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
        let json = |line: usize| move |source| TranscriptError::Json { line: line + 1, source };
        let (i, first) = lines.next().ok_or(TranscriptError::Missing("header"))?;
        let header: HeaderLine = serde_json::from_str(first).map_err(json(i))?;
        let mut moves = Vec::new();
        let mut fin = None;
        while let Some((i, line)) = lines.next() {
            if lines.peek().is_none() {
                fin = Some(serde_json::from_str::<FinalLine>(line).map_err(json(i))?);
                break;
            }
            let ml: MoveLine = serde_json::from_str(line).map_err(json(i))?;
            let entry = match ml.mover {
                Mover::Bob => Entry::Bob(serde_json::from_value(ml.mv).map_err(json(i))?),
                Mover::Alice => Entry::Alice(serde_json::from_value(ml.mv).map_err(json(i))?),
            };
            moves.push(MoveRecord { round: ml.round, entry });
        }
        let fin = fin.ok_or(TranscriptError::Missing("verdict"))?;
        Ok(Self {
            params: header.params,
            moves,
            final_ball: fin.final_ball,
            verdict: fin.verdict,
            verdict_evidence: fin.evidence,
            termination: fin.termination,
        })
    }
}
