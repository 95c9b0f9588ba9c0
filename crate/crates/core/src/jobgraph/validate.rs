use std::collections::HashMap;
use std::fmt;

use super::JobGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Copy,
    Convolution,
    Addition,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Copy => "copy",
            Stage::Convolution => "convolution",
            Stage::Addition => "addition",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ViolationKind {
    #[error("slot {slot} is out of range")]
    SlotOutOfRange { slot: usize },
    #[error("job is tagged with layer {found}")]
    WrongLayerTag { found: usize },
    #[error("reads slot {slot} before any earlier layer writes it")]
    UnproducedInput { slot: usize },
    #[error("reads slot {slot}, which {writer_stage} job {writer} writes in the same layer")]
    ReadWriteHazard {
        slot: usize,
        writer_stage: Stage,
        writer: usize,
    },
    #[error("writes slot {slot}, also written by {other_stage} job {other} in the same layer")]
    DuplicateWrite {
        slot: usize,
        other_stage: Stage,
        other: usize,
    },
    #[error("writes the static slot {slot}")]
    StaticWrite { slot: usize },
    #[error("output slot {slot} is also its second operand")]
    OutputAliasesOperand { slot: usize },
    #[error("adds slot {slot}, which the convolution stage never produced")]
    NotFromConvolution { slot: usize },
}

/// First schedule violation found, identified by stage, 1-based layer and
/// 0-based position of the job inside that layer.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{stage} layer {layer}, job {index}: {kind}")]
pub struct Violation {
    pub stage: Stage,
    pub layer: usize,
    pub index: usize,
    pub kind: ViolationKind,
}

struct Access {
    stage: Stage,
    index: usize,
    tagged_layer: usize,
    reads: Vec<usize>,
    write: usize,
    alias_forbidden: Option<usize>,
}

/// Checks the dependency and hazard rules of both stages.
pub fn validate(graph: &JobGraph) -> Result<(), Violation> {
    let layout = &graph.layout;
    let total = layout.total_slots();
    let mut written = vec![false; total];

    for (l0, layer) in graph.conv_layers.iter().enumerate() {
        let mut accesses = Vec::with_capacity(layer.len());
        if l0 == 0 {
            accesses.extend(graph.copies.iter().enumerate().map(|(i, c)| Access {
                stage: Stage::Copy,
                index: i,
                tagged_layer: 1,
                reads: vec![c.src],
                write: c.dst,
                alias_forbidden: None,
            }));
        }
        accesses.extend(layer.iter().enumerate().map(|(i, j)| Access {
            stage: Stage::Convolution,
            index: i,
            tagged_layer: j.layer,
            reads: vec![j.in1, j.in2],
            write: j.out,
            alias_forbidden: Some(j.in2),
        }));
        check_layer(l0 + 1, &accesses, &mut written, graph, None)?;
    }
    if graph.conv_layers.is_empty() && !graph.copies.is_empty() {
        let accesses: Vec<Access> = graph
            .copies
            .iter()
            .enumerate()
            .map(|(i, c)| Access {
                stage: Stage::Copy,
                index: i,
                tagged_layer: 1,
                reads: vec![c.src],
                write: c.dst,
                alias_forbidden: None,
            })
            .collect();
        check_layer(1, &accesses, &mut written, graph, None)?;
    }

    let from_conv = written.clone();
    for (l0, layer) in graph.add_layers.iter().enumerate() {
        let accesses: Vec<Access> = layer
            .iter()
            .enumerate()
            .map(|(i, j)| Access {
                stage: Stage::Addition,
                index: i,
                tagged_layer: j.layer,
                reads: vec![j.src, j.dst],
                write: j.dst,
                alias_forbidden: Some(j.src),
            })
            .collect();
        check_layer(l0 + 1, &accesses, &mut written, graph, Some(&from_conv))?;
    }
    Ok(())
}

fn check_layer(
    layer: usize,
    accesses: &[Access],
    written: &mut [bool],
    graph: &JobGraph,
    from_conv: Option<&[bool]>,
) -> Result<(), Violation> {
    let layout = &graph.layout;
    let total = layout.total_slots();
    let fail = |a: &Access, kind| Violation {
        stage: a.stage,
        layer,
        index: a.index,
        kind,
    };

    let mut writers: HashMap<usize, (Stage, usize)> = HashMap::with_capacity(accesses.len());
    for a in accesses {
        if let Some(&slot) = a.reads.iter().chain([&a.write]).find(|&&s| s >= total) {
            return Err(fail(a, ViolationKind::SlotOutOfRange { slot }));
        }
        if a.tagged_layer != layer {
            return Err(fail(a, ViolationKind::WrongLayerTag { found: a.tagged_layer }));
        }
        if a.alias_forbidden == Some(a.write) {
            return Err(fail(a, ViolationKind::OutputAliasesOperand { slot: a.write }));
        }
        if layout.is_static(a.write) {
            return Err(fail(a, ViolationKind::StaticWrite { slot: a.write }));
        }
        if let Some(&(other_stage, other)) = writers.get(&a.write) {
            return Err(fail(
                a,
                ViolationKind::DuplicateWrite {
                    slot: a.write,
                    other_stage,
                    other,
                },
            ));
        }
        writers.insert(a.write, (a.stage, a.index));
    }

    for a in accesses {
        for &slot in &a.reads {
            if let Some(produced) = from_conv {
                if !layout.is_static(slot) && !produced[slot] {
                    return Err(fail(a, ViolationKind::NotFromConvolution { slot }));
                }
            }
            if !layout.is_static(slot) && !written[slot] {
                return Err(fail(a, ViolationKind::UnproducedInput { slot }));
            }
            if let Some(&(writer_stage, writer)) = writers.get(&slot) {
                if (writer_stage, writer) != (a.stage, a.index) {
                    return Err(fail(
                        a,
                        ViolationKind::ReadWriteHazard {
                            slot,
                            writer_stage,
                            writer,
                        },
                    ));
                }
            }
        }
    }

    for a in accesses {
        written[a.write] = true;
    }
    Ok(())
}
