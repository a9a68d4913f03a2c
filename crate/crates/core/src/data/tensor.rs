use std::fs;
use std::path::Path;

use super::events::{Event, EventStream};
use crate::error::{Error, Result};
use crate::snn::SpikeMatrix;

/// Binary spike input for one example: `channels × T`, plus its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTensor {
    pub spikes: SpikeMatrix,
    pub label: usize,
}

impl EventTensor {
    pub fn channels(&self) -> usize {
        self.spikes.rows()
    }

    pub fn steps(&self) -> usize {
        self.spikes.cols()
    }

    /// Re-expresses the tensor as an event stream on a `width`-wide sensor:
    /// one `+1` event at tick `t` per spike, span `[0, T−1]`.
    pub fn to_event_stream(&self, width: u32) -> Result<EventStream> {
        let channels = self.channels() as u32;
        if width == 0 || !channels.is_multiple_of(width) {
            return Err(Error::contract(format!(
                "{channels} channels do not tile a sensor of width {width}"
            )));
        }
        let mut events = Vec::with_capacity(self.spikes.count_ones());
        for t in 0..self.steps() {
            for c in 0..self.channels() {
                if self.spikes.get(c, t) == 1 {
                    events.push(Event {
                        t: t as i64,
                        x: c as u32 % width,
                        y: c as u32 / width,
                        polarity: 1,
                    });
                }
            }
        }
        Ok(EventStream {
            width,
            height: channels / width,
            label: self.label,
            events,
            span: Some((0, self.steps() as i64 - 1)),
        })
    }
}

const TAG: &str = "SPIKES";

/// Text form: `SPIKES <channels> <steps> <label>` then one line of `0`/`1`
/// characters per channel.
pub fn write_tensor_file(path: &Path, tensor: &EventTensor) -> Result<()> {
    let mut out = format!(
        "{TAG} {} {} {}\n",
        tensor.channels(),
        tensor.steps(),
        tensor.label
    );
    out.reserve(tensor.channels() * (tensor.steps() + 1));
    for c in 0..tensor.channels() {
        out.extend(
            tensor
                .spikes
                .row(c)
                .iter()
                .map(|&v| if v == 1 { '1' } else { '0' }),
        );
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_tensor_file(path: &Path) -> Result<EventTensor> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::data(path, "empty file"))?
        .split_whitespace()
        .collect();
    if header.len() != 4 || header[0] != TAG {
        return Err(Error::data(
            path,
            "header must be `SPIKES <channels> <steps> <label>`",
        ));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::data(path, format!("bad header field `{s}`")))
    };
    let (channels, steps, label) = (num(header[1])?, num(header[2])?, num(header[3])?);
    let mut rows = Vec::with_capacity(channels);
    for c in 0..channels {
        let line = lines
            .next()
            .ok_or_else(|| Error::data(path, format!("missing row {c}")))?;
        let row: Option<Vec<u8>> = line
            .bytes()
            .map(|b| match b {
                b'0' => Some(0),
                b'1' => Some(1),
                _ => None,
            })
            .collect();
        match row {
            Some(r) if r.len() == steps => rows.push(r),
            _ => {
                return Err(Error::data(
                    path,
                    format!("row {c} must be {steps} characters of 0/1"),
                ))
            }
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::data(path, "extra rows after the last channel"));
    }
    let spikes = if channels == 0 {
        SpikeMatrix::zeros(0, steps)
    } else {
        SpikeMatrix::from_rows(&rows)?
    };
    Ok(EventTensor { spikes, label })
}
