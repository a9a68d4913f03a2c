//! Spike data: event streams, binary spike tensors, preprocessing and the
//! synthetic classification task.

mod events;
mod manifest;
mod preprocess;
mod synth;
mod tensor;

pub use events::{read_event_file, write_event_binary, write_event_text, Event, EventStream};
pub use manifest::{write_dataset, Dataset, Manifest, ManifestEntry, Split};
pub use preprocess::{encode_targets, preprocess, CropRegion};
pub use synth::{synth_task, SynthSpec};
pub use tensor::{read_tensor_file, write_tensor_file, EventTensor};
