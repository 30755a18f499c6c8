//! Models and their JSON document formats.
//!
//! A model is a set of variable cardinalities, an intersection-closed
//! nerve and an initial potential. The document format keeps tensors as
//! flat row-major arrays keyed by hyphen-joined sorted vertex ids, so
//! files stay human-diffable and language-neutral.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calculus::OperatorContext;
use crate::error::{Error, Result};
use crate::fields::{Field0, LocalTensor, Shape};
use crate::nerve::{Face, Nerve, VertexId};

pub const TENSOR_LAYOUT: &str = "row-major-sorted-vertices";

/// A dense tensor in document form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TensorDocument {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub layout: String,
}

impl TensorDocument {
    pub fn from_tensor(tensor: &LocalTensor, shape: &Shape) -> Result<Self> {
        Ok(TensorDocument {
            shape: shape.dims(tensor.face())?,
            data: tensor.values().to_vec(),
            layout: TENSOR_LAYOUT.to_string(),
        })
    }
}

/// On-disk form of a model.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelDocument {
    pub variables: BTreeMap<VertexId, usize>,
    pub faces: Vec<Vec<VertexId>>,
    #[serde(default)]
    pub potentials: BTreeMap<String, TensorDocument>,
    #[serde(default)]
    pub closure_performed: bool,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}

/// Variable cardinalities, closed nerve and initial potential.
#[derive(Clone, Debug)]
pub struct Model {
    shape: Shape,
    nerve: Nerve,
    potential: Field0,
    closure_performed: bool,
}

impl Model {
    pub fn new(shape: Shape, nerve: Nerve, potential: Field0) -> Result<Self> {
        OperatorContext::new(&nerve, &shape)?;
        if potential.len() != nerve.face_count() {
            return Err(Error::FieldMismatch {
                expected: nerve.face_count(),
                got: potential.len(),
            });
        }
        Ok(Model {
            shape,
            nerve,
            potential,
            closure_performed: false,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn nerve(&self) -> &Nerve {
        &self.nerve
    }

    pub fn potential(&self) -> &Field0 {
        &self.potential
    }

    pub fn set_potential(&mut self, potential: Field0) -> Result<()> {
        if potential.len() != self.nerve.face_count() {
            return Err(Error::FieldMismatch {
                expected: self.nerve.face_count(),
                got: potential.len(),
            });
        }
        self.potential = potential;
        Ok(())
    }

    pub fn context(&self) -> OperatorContext<'_> {
        OperatorContext::new(&self.nerve, &self.shape).expect("validated at construction")
    }

    pub fn closure_performed(&self) -> bool {
        self.closure_performed
    }

    /// The 2-horn preset: three triangles of a tetrahedron joined at a
    /// common vertex, binary variables, zero potential.
    pub fn horn2() -> Self {
        let faces = vec![
            Face::new([0, 1, 2]).unwrap(),
            Face::new([0, 2, 3]).unwrap(),
            Face::new([1, 2, 3]).unwrap(),
        ];
        let nerve = Nerve::intersection_closure(&faces).unwrap();
        let shape = Shape::uniform(&[0, 1, 2, 3], 2).unwrap();
        let potential = Field0::zeros(&nerve, &shape).unwrap();
        let mut model = Model::new(shape, nerve, potential).unwrap();
        model.closure_performed = true;
        model
    }

    pub fn to_document(&self) -> Result<ModelDocument> {
        let potentials = self
            .potential
            .tensors()
            .iter()
            .map(|t| Ok((t.face().key(), TensorDocument::from_tensor(t, &self.shape)?)))
            .collect::<Result<_>>()?;
        Ok(ModelDocument {
            variables: self.shape.cardinalities().clone(),
            faces: self
                .nerve
                .faces()
                .iter()
                .map(|f| f.vertices().to_vec())
                .collect(),
            potentials,
            closure_performed: self.closure_performed,
        })
    }
}

/// Validates a document and builds the model. Faces are canonicalized,
/// the intersection closure is applied unless disabled, and faces without
/// a declared potential get zeros.
pub fn load_model(doc: &ModelDocument, apply_closure: bool) -> Result<Model> {
    let shape = Shape::new(doc.variables.clone())?;

    let mut faces: Vec<Face> = Vec::with_capacity(doc.faces.len());
    let mut seen: BTreeSet<Face> = BTreeSet::new();
    for ids in &doc.faces {
        let face = Face::new(ids.iter().copied())?;
        for &v in face.vertices() {
            if !shape.contains(v) {
                return Err(Error::UnknownVertex { vertex: v });
            }
        }
        if !seen.insert(face.clone()) {
            return Err(Error::DuplicateFace { face: face.key() });
        }
        faces.push(face);
    }

    let nerve = if apply_closure {
        Nerve::intersection_closure(&faces)?
    } else {
        Nerve::new(faces.clone())?
    };

    let declared: BTreeSet<&Face> = faces.iter().collect();
    let mut tensors: BTreeMap<Face, LocalTensor> = BTreeMap::new();
    for (key, pot) in &doc.potentials {
        let face = Face::parse_key(key)?;
        if !declared.contains(&face) {
            return Err(Error::UnknownFace { face: face.key() });
        }
        if pot.layout != TENSOR_LAYOUT {
            return Err(Error::BadLayout {
                got: pot.layout.clone(),
            });
        }
        let dims = shape.dims(&face)?;
        if pot.shape != dims {
            return Err(Error::TensorLength {
                face: face.key(),
                expected: dims.iter().product(),
                got: pot.shape.iter().product(),
            });
        }
        if pot.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { face: face.key() });
        }
        let tensor = LocalTensor::from_values(face.clone(), &shape, pot.data.clone())?;
        tensors.insert(face, tensor);
    }

    let potential = Field0::from_tensors(
        &nerve,
        nerve
            .faces()
            .iter()
            .map(|f| match tensors.remove(f) {
                Some(t) => Ok(t),
                None => LocalTensor::zeros(f.clone(), &shape),
            })
            .collect::<Result<_>>()?,
    )?;

    let mut model = Model::new(shape, nerve, potential)?;
    model.closure_performed = apply_closure || doc.closure_performed;
    Ok(model)
}

/// On-disk form of a collection of per-face beliefs, with the oracle's
/// scalar outputs when they were computed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BeliefDocument {
    pub variables: BTreeMap<VertexId, usize>,
    pub faces: Vec<Vec<VertexId>>,
    pub beliefs: BTreeMap<String, TensorDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_partition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_energy: Option<f64>,
}

impl BeliefDocument {
    pub fn from_field(model: &Model, field: &Field0) -> Result<Self> {
        let beliefs = field
            .tensors()
            .iter()
            .map(|t| {
                Ok((
                    t.face().key(),
                    TensorDocument::from_tensor(t, model.shape())?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(BeliefDocument {
            variables: model.shape().cardinalities().clone(),
            faces: model
                .nerve()
                .faces()
                .iter()
                .map(|f| f.vertices().to_vec())
                .collect(),
            beliefs,
            log_partition: None,
            free_energy: None,
        })
    }

    /// Reassembles a degree-0 field over the model's nerve; every face
    /// must carry a belief tensor.
    pub fn to_field(&self, model: &Model) -> Result<Field0> {
        let mut by_face: BTreeMap<Face, &TensorDocument> = BTreeMap::new();
        for (key, doc) in &self.beliefs {
            by_face.insert(Face::parse_key(key)?, doc);
        }
        let tensors = model
            .nerve()
            .faces()
            .iter()
            .map(|f| {
                let doc = by_face
                    .get(f)
                    .ok_or_else(|| Error::MissingBelief { face: f.key() })?;
                if doc.layout != TENSOR_LAYOUT {
                    return Err(Error::BadLayout {
                        got: doc.layout.clone(),
                    });
                }
                LocalTensor::from_values(f.clone(), model.shape(), doc.data.clone())
            })
            .collect::<Result<_>>()?;
        Field0::from_tensors(model.nerve(), tensors)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()?)?)
    }
}
