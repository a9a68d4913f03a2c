use serde::{Deserialize, Serialize};

use super::events::EventStream;
use super::tensor::EventTensor;
use crate::error::{Error, Result};
use crate::snn::SpikeMatrix;

/// Pixel rectangle kept by [`preprocess`]; channel index is
/// `(y − y0)·width + (x − x0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRegion {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl CropRegion {
    pub fn channels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// `size × size` region centered on a `sensor_width × sensor_height`
    /// sensor.
    pub fn centered(sensor_width: u32, sensor_height: u32, size: u32) -> Self {
        Self {
            x: sensor_width.saturating_sub(size) / 2,
            y: sensor_height.saturating_sub(size) / 2,
            width: size,
            height: size,
        }
    }
}

/// Bins an event stream into a `crop.width·crop.height × steps` spike tensor.
///
/// The recording span `[start, end]` is split into `steps` equal windows;
/// tick `t` falls in window `⌊(t − start)·steps / (end − start + 1)⌋`. A
/// channel spikes in a window when at least one event of either polarity
/// hits its pixel there. Events outside the crop or the span are dropped.
pub fn preprocess(stream: &EventStream, crop: CropRegion, steps: usize) -> Result<EventTensor> {
    if steps == 0 {
        return Err(Error::config("time steps must be at least 1"));
    }
    if crop.width == 0 || crop.height == 0 {
        return Err(Error::config("crop region is empty"));
    }
    if crop.x as u64 + crop.width as u64 > stream.width as u64
        || crop.y as u64 + crop.height as u64 > stream.height as u64
    {
        return Err(Error::config(format!(
            "crop {}x{}+{}+{} exceeds the {}x{} sensor",
            crop.width, crop.height, crop.x, crop.y, stream.width, stream.height
        )));
    }
    stream.validate()?;
    let mut spikes = SpikeMatrix::zeros(crop.channels(), steps);
    if let Some((start, end)) = stream.time_span() {
        let span = (end as i128 - start as i128 + 1) as u128;
        for e in &stream.events {
            if e.t < start || e.t > end {
                continue;
            }
            if e.x < crop.x || e.y < crop.y {
                continue;
            }
            let (cx, cy) = (e.x - crop.x, e.y - crop.y);
            if cx >= crop.width || cy >= crop.height {
                continue;
            }
            let window = ((e.t as i128 - start as i128) as u128 * steps as u128 / span) as usize;
            spikes.set((cy * crop.width + cx) as usize, window, 1);
        }
    }
    Ok(EventTensor {
        spikes,
        label: stream.label,
    })
}

/// Desired output raster: row `label` all ones, every other row zero.
pub fn encode_targets(label: usize, num_classes: usize, steps: usize) -> Result<SpikeMatrix> {
    if label >= num_classes {
        return Err(Error::contract(format!(
            "label {label} out of range for {num_classes} classes"
        )));
    }
    let mut m = SpikeMatrix::zeros(num_classes, steps);
    for t in 0..steps {
        m.set(label, t, 1);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Event;

    fn stream(events: Vec<(i64, u32, u32)>, span: Option<(i64, i64)>) -> EventStream {
        EventStream {
            width: 8,
            height: 6,
            label: 1,
            events: events
                .into_iter()
                .map(|(t, x, y)| Event {
                    t,
                    x,
                    y,
                    polarity: 1,
                })
                .collect(),
            span,
        }
    }

    fn full() -> CropRegion {
        CropRegion {
            x: 0,
            y: 0,
            width: 8,
            height: 6,
        }
    }

    #[test]
    fn empty_stream_gives_zero_tensor() {
        let t = preprocess(&stream(vec![], None), full(), 5).unwrap();
        assert_eq!(t.spikes, SpikeMatrix::zeros(48, 5));
        assert_eq!(t.label, 1);
    }

    #[test]
    fn single_event_mid_recording() {
        let s = stream(vec![(0, 7, 5), (50, 0, 0), (99, 7, 5)], None);
        let crop = CropRegion {
            x: 0,
            y: 0,
            width: 2,
            height: 2,
        };
        let t = preprocess(&s, crop, 10).unwrap();
        assert_eq!(t.spikes.count_ones(), 1);
        assert_eq!(t.spikes.get(0, 5), 1);
    }

    #[test]
    fn crop_offsets_channels() {
        let s = stream(vec![(0, 3, 2), (9, 4, 3)], None);
        let crop = CropRegion {
            x: 3,
            y: 2,
            width: 2,
            height: 2,
        };
        let t = preprocess(&s, crop, 2).unwrap();
        assert_eq!(t.spikes.get(0, 0), 1);
        assert_eq!(t.spikes.get(3, 1), 1);
        assert_eq!(t.spikes.count_ones(), 2);
    }

    #[test]
    fn configuration_errors() {
        let s = stream(vec![], None);
        assert!(matches!(preprocess(&s, full(), 0), Err(Error::Config(_))));
        let empty = CropRegion {
            x: 0,
            y: 0,
            width: 0,
            height: 3,
        };
        assert!(matches!(preprocess(&s, empty, 4), Err(Error::Config(_))));
        let outside = CropRegion {
            x: 4,
            y: 0,
            width: 5,
            height: 3,
        };
        assert!(matches!(preprocess(&s, outside, 4), Err(Error::Config(_))));
    }

    #[test]
    fn centered_sensor_crop_has_676_channels() {
        let c = CropRegion::centered(128, 128, 26);
        assert_eq!(c.channels(), 676);
        assert_eq!((c.x, c.y), (51, 51));
    }

    #[test]
    fn target_rows() {
        let m = encode_targets(0, 3, 4).unwrap();
        assert_eq!(m.row(0), &[1, 1, 1, 1]);
        assert_eq!(m.row(1), &[0, 0, 0, 0]);
        assert_eq!(m.row(2), &[0, 0, 0, 0]);
        let m = encode_targets(2, 3, 80).unwrap();
        assert_eq!(m.row_sum(2), 80);
        assert_eq!(m.count_ones(), 80);
        assert!(encode_targets(3, 3, 4).is_err());
    }
}
