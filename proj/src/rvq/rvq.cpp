#include "complexdec/rvq/rvq.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace complexdec::rvq {

namespace {

// Column-wise nearest codes for a whole batch: argmin_k ||x - e_k||^2 via
// ||e_k||^2 - 2 <x, e_k>, ties to the lowest index.
Eigen::VectorXi nearest_batch(const Eigen::MatrixXf& vectors, const Codebook& cb) {
    const Eigen::VectorXf entry_norms = cb.entries.rowwise().squaredNorm();
    Eigen::MatrixXf scores = cb.entries * vectors;  // K x T
    scores.colwise() -= 0.5f * entry_norms;
    Eigen::VectorXi out(vectors.cols());
    for (Eigen::Index t = 0; t < vectors.cols(); ++t) {
        int best = 0;
        float best_score = scores(0, t);
        for (int k = 1; k < cb.size(); ++k) {
            if (scores(k, t) > best_score) {  // strict: ties keep the lowest index
                best_score = scores(k, t);
                best = k;
            }
        }
        out[t] = best;
    }
    return out;
}

void check_dims(const Eigen::MatrixXf& latents, const RvqStack& stack) {
    if (stack.stages.empty()) throw std::invalid_argument("rvq: empty stack");
    if (int(latents.rows()) != stack.dim())
        throw std::invalid_argument("rvq: latent dim does not match the stack");
}

void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
}
void read_bytes(std::istream& in, void* p, size_t n) {
    if (!in.read(static_cast<char*>(p), std::streamsize(n)))
        throw std::runtime_error("codebook checkpoint: unexpected end of stream");
}

}  // namespace

Codebook Codebook::zeros(int k, int d, float decay) {
    Codebook cb;
    cb.entries = Eigen::MatrixXf::Zero(k, d);
    cb.ema_cluster_size = Eigen::VectorXf::Zero(k);
    cb.ema_embed_sum = Eigen::MatrixXf::Zero(k, d);
    cb.decay = decay;
    cb.unused_batches = Eigen::VectorXi::Zero(k);
    return cb;
}

NearestResult vq_nearest(const Eigen::VectorXf& vec, const Codebook& codebook) {
    if (codebook.size() == 0) throw std::invalid_argument("vq_nearest: empty codebook");
    if (int(vec.size()) != codebook.dim())
        throw std::invalid_argument("vq_nearest: dimension mismatch");
    const Eigen::VectorXi idx = nearest_batch(vec, codebook);
    return {idx[0], codebook.entries.row(idx[0]).transpose()};
}

Eigen::VectorXi assign_codes(const Eigen::MatrixXf& vectors, const Codebook& codebook) {
    if (codebook.size() == 0) throw std::invalid_argument("assign_codes: empty codebook");
    if (int(vectors.rows()) != codebook.dim())
        throw std::invalid_argument("assign_codes: dimension mismatch");
    return nearest_batch(vectors, codebook);
}

QuantizationResult rvq_encode(const Eigen::MatrixXf& latents, const RvqStack& stack) {
    check_dims(latents, stack);
    const Eigen::Index t = latents.cols();
    QuantizationResult res;
    res.indices.resize(stack.n_stages(), t);
    res.quantized = Eigen::MatrixXf::Zero(latents.rows(), t);
    res.residual_energy_per_stage.resize(stack.n_stages());

    Eigen::MatrixXf residual = latents;
    for (int s = 0; s < stack.n_stages(); ++s) {
        const Codebook& cb = stack.stages[s];
        const Eigen::VectorXi idx = nearest_batch(residual, cb);
        for (Eigen::Index j = 0; j < t; ++j) {
            res.indices(s, j) = idx[j];
            residual.col(j) -= cb.entries.row(idx[j]).transpose();
            res.quantized.col(j) += cb.entries.row(idx[j]).transpose();
        }
        res.residual_energy_per_stage[s] = t > 0 ? residual.squaredNorm() / float(t) : 0.f;
    }
    return res;
}

Eigen::MatrixXf rvq_decode(const Eigen::MatrixXi& indices, const RvqStack& stack) {
    if (indices.rows() != stack.n_stages())
        throw std::invalid_argument("rvq_decode: stage count mismatch");
    Eigen::MatrixXf out = Eigen::MatrixXf::Zero(stack.dim(), indices.cols());
    for (int s = 0; s < stack.n_stages(); ++s) {
        const Codebook& cb = stack.stages[s];
        for (Eigen::Index j = 0; j < indices.cols(); ++j) {
            const int k = indices(s, j);
            if (k < 0 || k >= cb.size())
                throw std::out_of_range("rvq_decode: index out of range");
            out.col(j) += cb.entries.row(k).transpose();
        }
    }
    return out;
}

void ema_update(Codebook& cb, const Eigen::MatrixXf& vectors, const Eigen::VectorXi& assignments,
                float laplace_eps) {
    if (vectors.cols() != assignments.size())
        throw std::invalid_argument("ema_update: assignment count mismatch");
    const int k = cb.size();
    Eigen::VectorXf counts = Eigen::VectorXf::Zero(k);
    Eigen::MatrixXf sums = Eigen::MatrixXf::Zero(k, cb.dim());
    for (Eigen::Index j = 0; j < assignments.size(); ++j) {
        const int a = assignments[j];
        if (a < 0 || a >= k) throw std::out_of_range("ema_update: invalid assignment");
        counts[a] += 1.f;
        sums.row(a) += vectors.col(j).transpose();
    }

    cb.ema_cluster_size = cb.decay * cb.ema_cluster_size + (1.f - cb.decay) * counts;
    cb.ema_embed_sum = cb.decay * cb.ema_embed_sum + (1.f - cb.decay) * sums;
    for (int i = 0; i < k; ++i) {
        if (counts[i] > 0.f) {
            cb.entries.row(i) = cb.ema_embed_sum.row(i) / (cb.ema_cluster_size[i] + laplace_eps);
            cb.unused_batches[i] = 0;
        } else {
            // Unassigned codes keep their entries; only their age moves.
            cb.unused_batches[i] += 1;
        }
    }
}

int revive_dead_codes(Codebook& cb, const Eigen::MatrixXf& latents, std::mt19937_64& rng,
                      int threshold) {
    if (latents.cols() == 0) return 0;
    std::uniform_int_distribution<Eigen::Index> pick(0, latents.cols() - 1);
    int revived = 0;
    for (int i = 0; i < cb.size(); ++i) {
        if (cb.unused_batches[i] < threshold) continue;
        const Eigen::VectorXf seed = latents.col(pick(rng));
        cb.entries.row(i) = seed.transpose();
        cb.ema_embed_sum.row(i) = seed.transpose();
        cb.ema_cluster_size[i] = 1.f;
        cb.unused_batches[i] = 0;
        ++revived;
    }
    return revived;
}

void init_from_batch(RvqStack& stack, const Eigen::MatrixXf& latents, std::mt19937_64& rng) {
    if (latents.cols() == 0) throw std::invalid_argument("init_from_batch: empty batch");
    std::uniform_int_distribution<Eigen::Index> pick(0, latents.cols() - 1);
    Eigen::MatrixXf residual = latents;
    for (Codebook& cb : stack.stages) {
        for (int i = 0; i < cb.size(); ++i) {
            cb.entries.row(i) = residual.col(pick(rng)).transpose();
            cb.ema_embed_sum.row(i) = cb.entries.row(i);
            cb.ema_cluster_size[i] = 1.f;
        }
        const Eigen::VectorXi idx = nearest_batch(residual, cb);
        for (Eigen::Index j = 0; j < residual.cols(); ++j)
            residual.col(j) -= cb.entries.row(idx[j]).transpose();
    }
}

float commitment_loss(const Eigen::MatrixXf& latents, const Eigen::MatrixXf& quantized) {
    if (latents.rows() != quantized.rows() || latents.cols() != quantized.cols())
        throw std::invalid_argument("commitment_loss: shape mismatch");
    return (latents - quantized).squaredNorm() / float(latents.size());
}

float perplexity(const Eigen::VectorXi& assignments, int k) {
    if (assignments.size() == 0) return 0.f;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < assignments.size(); ++i) hist[assignments[i]] += 1.0;
    hist /= double(assignments.size());
    double entropy = 0.0;
    for (int i = 0; i < k; ++i)
        if (hist[i] > 0.0) entropy -= hist[i] * std::log(hist[i]);
    return float(std::exp(entropy));
}

void save_stack(std::ostream& out, const RvqStack& stack, uint8_t branch_tag) {
    const char magic[4] = {'C', 'P', 'X', 'B'};
    write_bytes(out, magic, 4);
    const uint32_t k = uint32_t(stack.codebook_size());
    const uint32_t d = uint32_t(stack.dim());
    const uint32_t n = uint32_t(stack.n_stages());
    write_bytes(out, &k, 4);
    write_bytes(out, &d, 4);
    write_bytes(out, &n, 4);
    write_bytes(out, &branch_tag, 1);
    const float decay = stack.stages.empty() ? 0.99f : stack.stages.front().decay;
    write_bytes(out, &decay, 4);
    for (const Codebook& cb : stack.stages) {
        // Row-major entries.
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = cb.entries;
        write_bytes(out, rm.data(), sizeof(float) * rm.size());
        write_bytes(out, cb.ema_cluster_size.data(), sizeof(float) * cb.ema_cluster_size.size());
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rs = cb.ema_embed_sum;
        write_bytes(out, rs.data(), sizeof(float) * rs.size());
    }
}

RvqStack load_stack(std::istream& in, uint8_t expected_branch_tag) {
    char magic[4];
    read_bytes(in, magic, 4);
    if (std::memcmp(magic, "CPXB", 4) != 0)
        throw std::runtime_error("codebook checkpoint: bad magic");
    uint32_t k = 0, d = 0, n = 0;
    read_bytes(in, &k, 4);
    read_bytes(in, &d, 4);
    read_bytes(in, &n, 4);
    uint8_t tag = 0;
    read_bytes(in, &tag, 1);
    if (tag != expected_branch_tag)
        throw std::runtime_error("codebook checkpoint: branch tag mismatch");
    float decay = 0.99f;
    read_bytes(in, &decay, 4);

    RvqStack stack;
    stack.stages.reserve(n);
    for (uint32_t s = 0; s < n; ++s) {
        Codebook cb = Codebook::zeros(int(k), int(d), decay);
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(k, d);
        read_bytes(in, rm.data(), sizeof(float) * rm.size());
        cb.entries = rm;
        read_bytes(in, cb.ema_cluster_size.data(), sizeof(float) * k);
        Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rs(k, d);
        read_bytes(in, rs.data(), sizeof(float) * rs.size());
        cb.ema_embed_sum = rs;
        stack.stages.push_back(std::move(cb));
    }
    return stack;
}

}  // namespace complexdec::rvq
