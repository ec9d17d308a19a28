#include "cran/stuffing.hpp"

#include <cmath>
#include <numeric>

#include "cran/complex_embedding.hpp"
#include "cran/errors.hpp"

namespace cran {

std::string to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::PowerMin: return "PowerMin";
    case ProblemFamily::GroupSparseStage1: return "GroupSparseStage1";
    case ProblemFamily::FeasibilityCheck: return "FeasibilityCheck";
    case ProblemFamily::ScenarioScb: return "ScenarioScb";
    case ProblemFamily::MaxMinProbe: return "MaxMinProbe";
  }
  return "Unknown";
}

ProblemFamily family_from_string(const std::string& s) {
  for (auto f : {ProblemFamily::PowerMin, ProblemFamily::GroupSparseStage1,
                 ProblemFamily::FeasibilityCheck, ProblemFamily::ScenarioScb,
                 ProblemFamily::MaxMinProbe})
    if (to_string(f) == s) return f;
  throw InvalidArgument("unsupported problem family: " + s);
}

int FamilyDims::num_antennas() const { return std::accumulate(antennas.begin(), antennas.end(), 0); }

void FamilyDims::validate(ProblemFamily f) const {
  if (antennas.empty()) throw InvalidArgument("family dims need at least one RRH");
  for (int a : antennas)
    if (a < 1) throw InvalidArgument("each RRH needs at least one antenna");
  if (users < 0) throw InvalidArgument("number of users must be nonnegative");
  if (scenarios < 1) throw InvalidArgument("scenario count must be >= 1");
  if (f != ProblemFamily::ScenarioScb && scenarios != 1)
    throw InvalidArgument("only ScenarioScb takes more than one channel sample");
}

void FamilyData::validate(ProblemFamily f, const FamilyDims& dims) const {
  const int K = dims.users;
  const int L = dims.num_rrhs();
  const int N = dims.num_antennas();
  if (static_cast<int>(channels.size()) != dims.scenarios)
    throw InvalidArgument("expected " + std::to_string(dims.scenarios) + " channel matrices, got " +
                          std::to_string(channels.size()));
  for (const auto& H : channels)
    if (H.rows() != K || H.cols() != N) throw InvalidArgument("channel matrix must be K x N");
  if (target_sinr.size() != K || noise_power.size() != K)
    throw InvalidArgument("SINR targets and noise powers need one entry per user");
  if (max_tx_w.size() != L || drain_efficiency.size() != L)
    throw InvalidArgument("power caps and drain efficiencies need one entry per RRH");
  if (f == ProblemFamily::GroupSparseStage1 && group_weight.size() != L)
    throw InvalidArgument("group weights need one entry per RRH");
}

namespace {

int epigraph_vars(ProblemFamily f, const FamilyDims& dims) {
  switch (f) {
    case ProblemFamily::PowerMin:
    case ProblemFamily::ScenarioScb: return 1;
    case ProblemFamily::GroupSparseStage1: return dims.num_rrhs();
    case ProblemFamily::FeasibilityCheck:
    case ProblemFamily::MaxMinProbe: return 0;
  }
  return 0;
}

std::vector<int> antenna_owner(const FamilyDims& dims) {
  std::vector<int> owner;
  for (int l = 0; l < dims.num_rrhs(); ++l) owner.insert(owner.end(), dims.antennas[l], l);
  return owner;
}

}  // namespace

VariableLayout::VariableLayout(ProblemFamily f, const FamilyDims& dims)
    : epigraph(epigraph_vars(f, dims)), antennas(dims.num_antennas()), users(dims.users) {}

ConeSpec family_cone(ProblemFamily f, const FamilyDims& dims) {
  dims.validate(f);
  const int K = dims.users;
  const int N = dims.num_antennas();
  ConeSpec cone;
  for (int s = 0; s < dims.scenarios; ++s)
    for (int k = 0; k < K; ++k) cone.soc_dims.push_back(2 * K);
  for (int a : dims.antennas) cone.soc_dims.push_back(1 + 2 * a * K);
  switch (f) {
    case ProblemFamily::PowerMin:
    case ProblemFamily::ScenarioScb: cone.soc_dims.push_back(1 + 2 * N * K); break;
    case ProblemFamily::GroupSparseStage1:
      for (int a : dims.antennas) cone.soc_dims.push_back(1 + 2 * a * K);
      break;
    case ProblemFamily::FeasibilityCheck:
    case ProblemFamily::MaxMinProbe: break;
  }
  return cone;
}

// ---------------------------------------------------------------------------
// From-scratch canonicalization.

ConeProgram canonicalize_reference(ProblemFamily f, const FamilyDims& dims, const FamilyData& data) {
  dims.validate(f);
  data.validate(f, dims);
  const int K = dims.users;
  const int L = dims.num_rrhs();
  const int N = dims.num_antennas();
  const VariableLayout vars(f, dims);
  const std::vector<int> owner = antenna_owner(dims);

  ConeProgram prog;
  prog.cone = family_cone(f, dims);
  const int m = prog.cone.total_dim();
  const int n = vars.size();
  prog.b = Vec::Zero(m);
  prog.c = Vec::Zero(n);
  std::vector<Triplet> trips;

  // Places -coeffs (a functional on (Re v_j; Im v_j)) in `row`.
  auto put_functional = [&](int row, int user, const Vec& coeffs) {
    for (int a = 0; a < N; ++a) {
      trips.push_back({row, vars.re(user, a), -coeffs[a]});
      trips.push_back({row, vars.im(user, a), -coeffs[N + a]});
    }
  };

  int row = 0;
  for (const CMat& H : data.channels) {
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXcd h = H.row(k).transpose();
      const double inv_sqrt_gamma = 1.0 / std::sqrt(data.target_sinr[k]);
      put_functional(row++, k, real_part_functional(h) * inv_sqrt_gamma);
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        put_functional(row++, j, real_part_functional(h));
        put_functional(row++, j, imag_part_functional(h));
      }
      prog.b[row++] = std::sqrt(data.noise_power[k]);
    }
  }

  int off = 0;
  for (int l = 0; l < L; ++l) {
    prog.b[row++] = std::sqrt(data.max_tx_w[l]);
    for (int part = 0; part < 2; ++part)
      for (int k = 0; k < K; ++k)
        for (int a = off; a < off + dims.antennas[l]; ++a)
          trips.push_back({row++, part == 0 ? vars.re(k, a) : vars.im(k, a), -1.0});
    off += dims.antennas[l];
  }

  if (f == ProblemFamily::PowerMin || f == ProblemFamily::ScenarioScb) {
    trips.push_back({row++, 0, -1.0});
    for (int i = 0; i < 2 * N * K; ++i) {
      const int antenna = (i % (N * K)) % N;
      const double inv_sqrt_eta = 1.0 / std::sqrt(data.drain_efficiency[owner[antenna]]);
      trips.push_back({row++, vars.epigraph + i, -inv_sqrt_eta});
    }
    prog.c[0] = 1.0;
  } else if (f == ProblemFamily::GroupSparseStage1) {
    off = 0;
    for (int l = 0; l < L; ++l) {
      trips.push_back({row++, l, -1.0});
      for (int part = 0; part < 2; ++part)
        for (int k = 0; k < K; ++k)
          for (int a = off; a < off + dims.antennas[l]; ++a)
            trips.push_back({row++, part == 0 ? vars.re(k, a) : vars.im(k, a), -1.0});
      off += dims.antennas[l];
      prog.c[l] = data.group_weight[l];
    }
  }

  prog.A = CscMatrix::from_triplets(m, n, trips, /*keep_zeros=*/true);
  return prog;
}

// ---------------------------------------------------------------------------
// Template path.

namespace {

struct DataOffsets {
  int channel = 1;
  int signal = 0;
  int sigma = 0;
  int cap = 0;
  int eta = 0;
  int weight = 0;
  int total = 0;

  explicit DataOffsets(const FamilyDims& d) {
    const int per_sample = 2 * d.users * d.num_antennas();
    signal = channel + d.scenarios * per_sample;
    sigma = signal + d.scenarios * per_sample;
    cap = sigma + d.users;
    eta = cap + d.num_rrhs();
    weight = eta + d.num_rrhs();
    total = weight + d.num_rrhs();
  }
  // part 0 = real, 1 = imaginary
  int channel_at(const FamilyDims& d, int s, int k, int a, int part) const {
    return channel + ((s * d.users + k) * d.num_antennas() + a) * 2 + part;
  }
  int signal_at(const FamilyDims& d, int s, int k, int a, int part) const {
    return signal + ((s * d.users + k) * d.num_antennas() + a) * 2 + part;
  }
};

constexpr std::int32_t pos(int datum) { return datum << 1; }
constexpr std::int32_t neg(int datum) { return (datum << 1) | 1; }
constexpr int kOne = 0;

inline double decode(std::int32_t code, const double* d) {
  const double v = d[code >> 1];
  return (code & 1) ? -v : v;
}

}  // namespace

StuffingTemplate StuffingTemplate::build(ProblemFamily f, const FamilyDims& dims) {
  dims.validate(f);
  StuffingTemplate t;
  t.family_ = f;
  t.dims_ = dims;
  t.cone_ = family_cone(f, dims);
  const VariableLayout vars(f, dims);
  const DataOffsets off(dims);
  const std::vector<int> owner = antenna_owner(dims);
  const int K = dims.users;
  const int L = dims.num_rrhs();
  const int N = dims.num_antennas();
  t.n_ = vars.size();
  t.m_ = t.cone_.total_dim();
  t.datum_count_ = off.total;
  t.b_src_.assign(t.m_, -1);
  t.c_src_.assign(t.n_, -1);

  // Triplet values carry the index of the entry's source code.
  std::vector<std::int32_t> codes;
  std::vector<Eigen::Triplet<double, int>> trips;
  auto put = [&](int row, int col, std::int32_t code) {
    trips.emplace_back(row, col, static_cast<double>(codes.size()));
    codes.push_back(code);
  };

  int row = 0;
  for (int s = 0; s < dims.scenarios; ++s) {
    for (int k = 0; k < K; ++k) {
      for (int a = 0; a < N; ++a) {
        put(row, vars.re(k, a), neg(off.signal_at(dims, s, k, a, 0)));
        put(row, vars.im(k, a), neg(off.signal_at(dims, s, k, a, 1)));
      }
      ++row;
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        for (int a = 0; a < N; ++a) {
          put(row, vars.re(j, a), neg(off.channel_at(dims, s, k, a, 0)));
          put(row, vars.im(j, a), neg(off.channel_at(dims, s, k, a, 1)));
          put(row + 1, vars.re(j, a), pos(off.channel_at(dims, s, k, a, 1)));
          put(row + 1, vars.im(j, a), neg(off.channel_at(dims, s, k, a, 0)));
        }
        row += 2;
      }
      t.b_src_[row++] = pos(off.sigma + k);
    }
  }

  auto group_rows = [&](int l, int first_antenna) {
    for (int part = 0; part < 2; ++part)
      for (int k = 0; k < K; ++k)
        for (int a = first_antenna; a < first_antenna + dims.antennas[l]; ++a)
          put(row++, part == 0 ? vars.re(k, a) : vars.im(k, a), neg(kOne));
  };

  for (int l = 0, first = 0; l < L; first += dims.antennas[l], ++l) {
    t.b_src_[row++] = pos(off.cap + l);
    group_rows(l, first);
  }

  if (f == ProblemFamily::PowerMin || f == ProblemFamily::ScenarioScb) {
    put(row++, 0, neg(kOne));
    for (int i = 0; i < 2 * N * K; ++i)
      put(row++, vars.epigraph + i, neg(off.eta + owner[(i % (N * K)) % N]));
    t.c_src_[0] = pos(kOne);
  } else if (f == ProblemFamily::GroupSparseStage1) {
    for (int l = 0, first = 0; l < L; first += dims.antennas[l], ++l) {
      put(row++, l, neg(kOne));
      group_rows(l, first);
      t.c_src_[l] = pos(off.weight + l);
    }
  }

  SpMat pattern(t.m_, t.n_);
  pattern.setFromTriplets(trips.begin(), trips.end());
  pattern.makeCompressed();
  const int nnz = static_cast<int>(pattern.nonZeros());
  t.col_ptr_ = std::make_shared<const std::vector<int>>(pattern.outerIndexPtr(),
                                                        pattern.outerIndexPtr() + t.n_ + 1);
  t.row_idx_ = std::make_shared<const std::vector<int>>(pattern.innerIndexPtr(),
                                                        pattern.innerIndexPtr() + nnz);
  t.a_src_.resize(nnz);
  for (int p = 0; p < nnz; ++p) t.a_src_[p] = codes[static_cast<std::size_t>(pattern.valuePtr()[p])];
  return t;
}

void StuffingTemplate::flatten(const FamilyData& data, std::vector<double>& d) const {
  const DataOffsets off(dims_);
  const int K = dims_.users;
  const int N = dims_.num_antennas();
  d.resize(off.total);
  d[kOne] = 1.0;
  for (int s = 0; s < dims_.scenarios; ++s) {
    const CMat& H = data.channels[s];
    for (int k = 0; k < K; ++k) {
      const double inv_sqrt_gamma = 1.0 / std::sqrt(data.target_sinr[k]);
      for (int a = 0; a < N; ++a) {
        const std::complex<double> h = H(k, a);
        d[off.channel_at(dims_, s, k, a, 0)] = h.real();
        d[off.channel_at(dims_, s, k, a, 1)] = h.imag();
        d[off.signal_at(dims_, s, k, a, 0)] = h.real() * inv_sqrt_gamma;
        d[off.signal_at(dims_, s, k, a, 1)] = h.imag() * inv_sqrt_gamma;
      }
    }
  }
  for (int k = 0; k < K; ++k) d[off.sigma + k] = std::sqrt(data.noise_power[k]);
  for (int l = 0; l < dims_.num_rrhs(); ++l) {
    d[off.cap + l] = std::sqrt(data.max_tx_w[l]);
    d[off.eta + l] = 1.0 / std::sqrt(data.drain_efficiency[l]);
    d[off.weight + l] = family_ == ProblemFamily::GroupSparseStage1 ? data.group_weight[l] : 0.0;
  }
}

ConeProgram StuffingTemplate::stuff(const FamilyData& data) const {
  data.validate(family_, dims_);
  std::vector<double> d;
  flatten(data, d);
  const double* dp = d.data();

  std::vector<double> vals(a_src_.size());
  for (std::size_t p = 0; p < a_src_.size(); ++p) vals[p] = decode(a_src_[p], dp);

  ConeProgram prog;
  prog.b.resize(m_);
  for (int i = 0; i < m_; ++i) prog.b[i] = b_src_[i] < 0 ? 0.0 : decode(b_src_[i], dp);
  prog.c.resize(n_);
  for (int j = 0; j < n_; ++j) prog.c[j] = c_src_[j] < 0 ? 0.0 : decode(c_src_[j], dp);
  prog.A = CscMatrix::from_trusted(m_, n_, col_ptr_, row_idx_, std::move(vals));
  prog.cone = cone_;
  return prog;
}

std::vector<StuffingTemplate::Slot> StuffingTemplate::slots() const {
  std::vector<Slot> out;
  auto add = [&](Target target, const std::vector<std::int32_t>& src) {
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] < 0 || (src[i] >> 1) == kOne) continue;
      out.push_back({src[i] >> 1, target, static_cast<int>(i), (src[i] & 1) ? -1.0 : 1.0});
    }
  };
  add(Target::A, a_src_);
  add(Target::b, b_src_);
  add(Target::c, c_src_);
  return out;
}

}  // namespace cran
