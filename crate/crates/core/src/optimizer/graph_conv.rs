use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};
use crate::mesh::AdjacencyInfo;

/// Parameters of a mesh graph convolution
/// `f'_i = (W0 f_i + b0 + sum_{j in N(i)} (W1 f_j + b1)) / (1 + |N(i)|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphConvParams {
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub b0: DVector<f64>,
    pub b1: DVector<f64>,
}

impl GraphConvParams {
    pub fn new(w0: DMatrix<f64>, w1: DMatrix<f64>, b0: DVector<f64>, b1: DVector<f64>) -> Result<Self> {
        let p = GraphConvParams { w0, w1, b0, b1 };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        GraphConvParams {
            w0: DMatrix::zeros(d_out, d_in),
            w1: DMatrix::zeros(d_out, d_in),
            b0: DVector::zeros(d_out),
            b1: DVector::zeros(d_out),
        }
    }

    pub fn d_in(&self) -> usize {
        self.w0.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.w0.nrows()
    }

    fn validate(&self) -> Result<()> {
        let (o, i) = self.w0.shape();
        if self.w1.shape() != (o, i) || self.b0.len() != o || self.b1.len() != o {
            return Err(GeoError::InvalidParameter(format!(
                "inconsistent graph convolution shapes: W0 {:?}, W1 {:?}, b0 {}, b1 {}",
                self.w0.shape(),
                self.w1.shape(),
                self.b0.len(),
                self.b1.len()
            )));
        }
        let all = self.w0.iter().chain(self.w1.iter()).chain(self.b0.iter()).chain(self.b1.iter());
        if all.copied().any(|x| !x.is_finite()) {
            return Err(GeoError::InvalidParameter("graph convolution parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Gradients of a scalar objective with respect to the graph convolution inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphConvGradients {
    pub features: DMatrix<f64>,
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub b0: DVector<f64>,
    pub b1: DVector<f64>,
}

fn check_shapes(features: &DMatrix<f64>, adj: &AdjacencyInfo, params: &GraphConvParams) -> Result<()> {
    params.validate()?;
    if features.nrows() != adj.vertex_count() {
        return Err(GeoError::LengthMismatch {
            expected: adj.vertex_count(),
            actual: features.nrows(),
        });
    }
    if features.ncols() != params.d_in() {
        return Err(GeoError::LengthMismatch {
            expected: params.d_in(),
            actual: features.ncols(),
        });
    }
    Ok(())
}

/// Sum of feature rows over each vertex's neighbors.
fn neighbor_sums(m: &DMatrix<f64>, adj: &AdjacencyInfo) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, nbrs) in adj.neighbors.iter().enumerate() {
        for &j in nbrs {
            let row = m.row(j as usize).into_owned();
            let mut r = out.row_mut(i);
            r += row;
        }
    }
    out
}

/// Forward pass. `features` holds one row per vertex (`V x d_in`); the result
/// is `V x d_out`.
pub fn graph_conv_forward(
    features: &DMatrix<f64>,
    adj: &AdjacencyInfo,
    params: &GraphConvParams,
) -> Result<DMatrix<f64>> {
    check_shapes(features, adj, params)?;
    let own = features * params.w0.transpose();
    let nb = neighbor_sums(features, adj) * params.w1.transpose();
    let mut out = own + nb;
    for (i, nbrs) in adj.neighbors.iter().enumerate() {
        let n = nbrs.len() as f64;
        let mut row = out.row_mut(i);
        row += params.b0.transpose() + params.b1.transpose() * n;
        row /= 1.0 + n;
    }
    Ok(out)
}

/// Vector-Jacobian product: given `upstream = dL/d(output)` (`V x d_out`),
/// returns `dL/d(features)` and the parameter gradients.
pub fn graph_conv_vjp(
    upstream: &DMatrix<f64>,
    features: &DMatrix<f64>,
    adj: &AdjacencyInfo,
    params: &GraphConvParams,
) -> Result<GraphConvGradients> {
    check_shapes(features, adj, params)?;
    if upstream.shape() != (features.nrows(), params.d_out()) {
        return Err(GeoError::InvalidParameter(format!(
            "upstream gradient has shape {:?}, expected ({}, {})",
            upstream.shape(),
            features.nrows(),
            params.d_out()
        )));
    }
    let mut scaled = upstream.clone();
    let mut b1 = DVector::zeros(params.d_out());
    for (i, nbrs) in adj.neighbors.iter().enumerate() {
        let n = nbrs.len() as f64;
        let mut row = scaled.row_mut(i);
        row /= 1.0 + n;
        b1 += row.transpose() * n;
    }
    let b0 = scaled.row_sum().transpose();
    let w0 = scaled.transpose() * features;
    let w1 = scaled.transpose() * neighbor_sums(features, adj);
    let features_grad = &scaled * &params.w0 + neighbor_sums(&scaled, adj) * &params.w1;
    Ok(GraphConvGradients {
        features: features_grad,
        w0,
        w1,
        b0,
        b1,
    })
}
