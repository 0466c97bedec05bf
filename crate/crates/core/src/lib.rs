//! Low-rank matrix factorization over GF(p) and the Boolean semiring.
//!
//! A rank-`r` factorization problem is rewritten as a clustering problem
//! with `p^r` centers whose coordinates are tied together by a relation
//! ([`reduction`]). The clustering problem is solved by alternating
//! center selection and reassignment ([`clustering`]), repeated from
//! several random starts ([`factorizer`]). For large ranks the columns are
//! first split into blocks with k-means and each block is factorized with a
//! small rank ([`bigrank`]).
//!
//! ```
//! use lrmf_core::{lrmf, verify, Algebra, Matrix};
//!
//! let a = Matrix::from_rows(Algebra::Boolean, &[[1, 1, 0], [1, 1, 0], [0, 0, 1]]).unwrap();
//! let res = lrmf(&a, 2, 1, 10, 7).unwrap();
//! assert!(res.u.cols() <= 2);
//! assert!(verify(&res, &a, 1).is_ok());
//! ```

pub mod bigrank;
pub mod clustering;
pub mod error;
pub mod factorizer;
pub mod field;
pub mod oracle;
pub mod reduction;

pub use bigrank::{kmeans, plrmf, split_meta_clusters, BlockPlan, KMeansOutcome, PartitionedFactorization};
pub use clustering::{
    point_distance, random_partition, Assignment, CenterSet, ClusteringInstance, ClusteringRun, Relation,
    RelationSet,
};
pub use error::{Error, Result};
pub use factorizer::{derive_seed, lrmf, DEFAULT_RESTARTS};
pub use field::{entrywise_error, gfp_rank, product, Algebra, Matrix, Metric};
pub use reduction::{build_uniform_relation, decode, encode, verify, CoeffOrdering, FactorizationResult};
