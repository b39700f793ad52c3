use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::egoview::ViewCondition;
use crate::error::{Error, Result};

const PLAN_STREAM: u64 = 0x51d3_6a0c_77e2_9b41;
pub const SQUARE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanCell {
    pub condition: ViewCondition,
    /// Graph pair id; each pair has a small training and a large measured graph.
    pub graph: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantRow {
    pub participant: usize,
    pub square_row: usize,
    pub cells: Vec<PlanCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub seed: u64,
    pub participants: usize,
    /// The three canonical rows of the Graeco-Latin square.
    pub square: Vec<Vec<PlanCell>>,
    pub rows: Vec<ParticipantRow>,
}

/// Graeco-Latin 3x3 design: conditions follow `(r + c) mod 3`, graphs
/// `(2r + c) mod 3`, with seeded relabeling of both symbol sets and of the
/// row order. Participant `p` runs row `p mod 3`.
pub fn build_plan(participants: usize, seed: u64) -> Result<StudyPlan> {
    if participants == 0 {
        return Err(Error::Parameter("a plan needs at least one participant".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PLAN_STREAM);
    let mut conditions = ViewCondition::ALL;
    conditions.shuffle(&mut rng);
    let mut graphs: Vec<usize> = (0..SQUARE).collect();
    graphs.shuffle(&mut rng);
    let mut order: Vec<usize> = (0..SQUARE).collect();
    order.shuffle(&mut rng);

    let square: Vec<Vec<PlanCell>> = order
        .iter()
        .map(|&r| {
            (0..SQUARE)
                .map(|c| PlanCell {
                    condition: conditions[(r + c) % SQUARE],
                    graph: graphs[(2 * r + c) % SQUARE],
                })
                .collect()
        })
        .collect();
    let rows = (0..participants)
        .map(|p| ParticipantRow {
            participant: p,
            square_row: p % SQUARE,
            cells: square[p % SQUARE].clone(),
        })
        .collect();
    Ok(StudyPlan { seed, participants, square, rows })
}

impl StudyPlan {
    /// Latin property of both component squares and their orthogonality.
    pub fn check_graeco_latin(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Format(format!("plan is not Graeco-Latin: {m}")));
        if self.square.len() != SQUARE || self.square.iter().any(|r| r.len() != SQUARE) {
            return bad("square must be 3x3");
        }
        for row in &self.square {
            let mut cs: Vec<_> = row.iter().map(|c| c.condition).collect();
            let mut gs: Vec<_> = row.iter().map(|c| c.graph).collect();
            cs.sort();
            cs.dedup();
            gs.sort();
            gs.dedup();
            if cs.len() != SQUARE || gs.len() != SQUARE {
                return bad("a row repeats a symbol");
            }
        }
        for col in 0..SQUARE {
            let mut cs: Vec<_> = self.square.iter().map(|r| r[col].condition).collect();
            let mut gs: Vec<_> = self.square.iter().map(|r| r[col].graph).collect();
            cs.sort();
            cs.dedup();
            gs.sort();
            gs.dedup();
            if cs.len() != SQUARE || gs.len() != SQUARE {
                return bad("a column repeats a symbol");
            }
        }
        let mut pairs: Vec<PlanCell> = self.square.iter().flatten().copied().collect();
        pairs.sort();
        pairs.dedup();
        if pairs.len() != SQUARE * SQUARE {
            return bad("the component squares are not orthogonal");
        }
        for (p, row) in self.rows.iter().enumerate() {
            if row.participant != p || row.cells != self.square[p % SQUARE] {
                return bad("participant rows do not cycle the square");
            }
        }
        Ok(())
    }
}
