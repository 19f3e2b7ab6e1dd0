// rvq.hpp
// Residual vector quantization with EMA codebook learning. One RvqStack per
// spectral branch (real / imaginary); encoding is read-only and thread-safe,
// ema_update is single-writer.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace complexdec::rvq {

struct Codebook {
    Eigen::MatrixXf entries;           // K x D
    Eigen::VectorXf ema_cluster_size;  // K
    Eigen::MatrixXf ema_embed_sum;     // K x D
    float decay = 0.99f;
    Eigen::VectorXi unused_batches;  // consecutive batches without an assignment

    int size() const { return int(entries.rows()); }
    int dim() const { return int(entries.cols()); }

    static Codebook zeros(int k, int d, float decay = 0.99f);
};

// Nearest entry by squared Euclidean distance, ties to the lowest index.
struct NearestResult {
    int index;
    Eigen::VectorXf entry;
};
NearestResult vq_nearest(const Eigen::VectorXf& vec, const Codebook& codebook);

// Column-wise nearest codes for a whole batch (D x T).
Eigen::VectorXi assign_codes(const Eigen::MatrixXf& vectors, const Codebook& codebook);

struct RvqStack {
    std::vector<Codebook> stages;

    int n_stages() const { return int(stages.size()); }
    int dim() const { return stages.empty() ? 0 : stages.front().dim(); }
    int codebook_size() const { return stages.empty() ? 0 : stages.front().size(); }
};

// latents and quantized are D x T (column = one frame).
struct QuantizationResult {
    Eigen::MatrixXi indices;     // n_stages x T
    Eigen::MatrixXf quantized;   // D x T, sum of addressed entries
    Eigen::VectorXf residual_energy_per_stage;  // mean ||residual||^2 after each stage
};

QuantizationResult rvq_encode(const Eigen::MatrixXf& latents, const RvqStack& stack);
Eigen::MatrixXf rvq_decode(const Eigen::MatrixXi& indices, const RvqStack& stack);

// EMA statistics update for one batch of assignments. vectors is D x T,
// assignments[t] the code chosen for column t. Unassigned codes keep their
// entries and age toward dead-code revival.
void ema_update(Codebook& codebook, const Eigen::MatrixXf& vectors,
                const Eigen::VectorXi& assignments, float laplace_eps = 1e-5f);

// Reseeds any code unused for >= threshold consecutive batches from a random
// column of latents. Returns the number of revived codes.
int revive_dead_codes(Codebook& codebook, const Eigen::MatrixXf& latents, std::mt19937_64& rng,
                      int threshold = 200);

// Initializes every stage's entries by sampling columns of the first batch.
void init_from_batch(RvqStack& stack, const Eigen::MatrixXf& latents, std::mt19937_64& rng);

// Mean squared error between latents and their (constant) quantization.
float commitment_loss(const Eigen::MatrixXf& latents, const Eigen::MatrixXf& quantized);

// exp of the entropy of the code-usage histogram; approaches K when usage
// is uniform.
float perplexity(const Eigen::VectorXi& assignments, int k);

// Checkpoint layout: "CPXB" magic, u32 K, u32 D, u32 n_stages, u8 branch
// tag, f32 decay, then per stage row-major f32 entries, f32 ema_cluster_size
// and row-major f32 ema_embed_sum.
void save_stack(std::ostream& out, const RvqStack& stack, uint8_t branch_tag);
RvqStack load_stack(std::istream& in, uint8_t expected_branch_tag);

}  // namespace complexdec::rvq
