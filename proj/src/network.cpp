#include "cran/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cran/errors.hpp"
#include "cran/rng.hpp"

namespace cran {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

int NetworkInstance::num_antennas() const {
  return std::accumulate(antennas.begin(), antennas.end(), 0);
}

int NetworkInstance::antenna_offset(int rrh) const {
  return std::accumulate(antennas.begin(), antennas.begin() + rrh, 0);
}

void NetworkInstance::validate() const {
  const int L = num_rrhs();
  const int K = num_users();
  for (int a : antennas)
    if (a < 1) throw InvalidArgument("each RRH needs at least one antenna");
  if (power.fronthaul_w.size() != L || power.drain_efficiency.size() != L ||
      power.max_tx_w.size() != L)
    throw InvalidArgument("power model must have one entry per RRH");
  if (noise_power.size() != K) throw InvalidArgument("noise power must have one entry per user");
  if (H.rows() != K || H.cols() != num_antennas())
    throw InvalidArgument("channel matrix must be K x N");
  if (large_scale.rows() != K || large_scale.cols() != L)
    throw InvalidArgument("large-scale fading must be K x L");
  if ((power.fronthaul_w.array() <= 0.0).any()) throw InvalidArgument("P^c must be positive");
  if ((power.drain_efficiency.array() <= 0.0).any())
    throw InvalidArgument("drain efficiency must be positive");
  if ((power.max_tx_w.array() <= 0.0).any()) throw InvalidArgument("P^max must be positive");
  if ((target_sinr.array() <= 0.0).any()) throw InvalidArgument("target SINR must be positive");
  if ((noise_power.array() <= 0.0).any()) throw InvalidArgument("noise power must be positive");
}

Topology generate_topology(std::uint64_t seed, int num_rrhs, int num_users, double half_width) {
  if (num_rrhs < 1 || num_users < 0) throw InvalidArgument("topology needs L >= 1 and K >= 0");
  Rng rng = Rng::stream(seed, "topology");
  Topology topo;
  auto draw = [&] { return Point{rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)}; };
  for (int l = 0; l < num_rrhs; ++l) topo.rrhs.push_back(draw());
  for (int k = 0; k < num_users; ++k) topo.users.push_back(draw());
  return topo;
}

Mat large_scale_fading(const Topology& topo, const ChannelModel& model,
                       std::uint64_t shadowing_seed) {
  Rng rng = Rng::stream(shadowing_seed, "shadowing");
  const int K = static_cast<int>(topo.users.size());
  const int L = static_cast<int>(topo.rrhs.size());
  const double noise_w = db_to_linear(model.noise_reference_dbm - 30.0);
  Mat g(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const double dx = topo.users[k].x - topo.rrhs[l].x;
      const double dy = topo.users[k].y - topo.rrhs[l].y;
      const double d_m = std::max(std::hypot(dx, dy), model.min_distance_m);
      const double pl_db = model.pathloss_intercept_db + model.pathloss_slope_db * std::log10(d_m / 1000.0);
      const double shadow_db = rng.normal(0.0, model.shadowing_std_db);
      g(k, l) = db_to_linear(-pl_db + shadow_db) / noise_w;
    }
  return g;
}

CMat small_scale_channel(const Mat& large_scale, const std::vector<int>& antennas,
                         std::uint64_t fading_seed) {
  if (static_cast<int>(antennas.size()) != large_scale.cols())
    throw InvalidArgument("antenna list must match the number of RRHs");
  Rng rng = Rng::stream(fading_seed, "fading");
  const int K = static_cast<int>(large_scale.rows());
  const int N = std::accumulate(antennas.begin(), antennas.end(), 0);
  CMat H(K, N);
  for (int k = 0; k < K; ++k) {
    int col = 0;
    for (std::size_t l = 0; l < antennas.size(); ++l)
      for (int a = 0; a < antennas[l]; ++a)
        H(k, col++) = std::sqrt(large_scale(k, static_cast<Eigen::Index>(l))) * rng.complex_normal();
  }
  return H;
}

ChannelSample sample_channel(const Topology& topo, const std::vector<int>& antennas,
                             const ChannelModel& model, std::uint64_t seed) {
  ChannelSample out;
  out.large_scale = large_scale_fading(topo, model, mix64(seed ^ 0x5348414430ULL));
  out.H = small_scale_channel(out.large_scale, antennas, mix64(seed ^ 0x46414445ULL));
  return out;
}

NetworkInstance make_instance(const NetworkConfig& cfg, std::uint64_t seed) {
  NetworkInstance inst;
  const int L = cfg.num_rrhs;
  const int K = cfg.num_users;
  if (L < 1 || K < 0 || cfg.antennas_per_rrh < 1) throw InvalidArgument("network dimensions must be positive");
  if (!cfg.fronthaul_w.empty() && static_cast<int>(cfg.fronthaul_w.size()) != L)
    throw InvalidArgument("fronthaul_w needs one entry per RRH");
  inst.topology = generate_topology(seed, L, K, cfg.half_width_m);
  inst.antennas.assign(L, cfg.antennas_per_rrh);
  inst.power.fronthaul_w.resize(L);
  for (int l = 0; l < L; ++l)
    inst.power.fronthaul_w[l] = cfg.fronthaul_w.empty() ? 5.0 + (l + 1) : cfg.fronthaul_w.at(l);
  inst.power.drain_efficiency = Vec::Constant(L, cfg.drain_efficiency);
  inst.power.max_tx_w = Vec::Constant(L, cfg.max_tx_w);
  inst.target_sinr = Vec::Constant(K, db_to_linear(cfg.target_sinr_db));
  inst.noise_power = Vec::Constant(K, cfg.noise_power);
  ChannelSample ch = sample_channel(inst.topology, inst.antennas, cfg.channel, seed);
  inst.H = std::move(ch.H);
  inst.large_scale = std::move(ch.large_scale);
  inst.validate();
  return inst;
}

Vec evaluate_sinr(const CMat& H, const CMat& V, const Vec& noise_power) {
  if (H.cols() != V.rows() || H.rows() != V.cols() || noise_power.size() != H.rows())
    throw InvalidArgument("evaluate_sinr: dimension mismatch");
  const CMat G = H.conjugate() * V;  // G(k, j) = h_k^H v_j
  const int K = static_cast<int>(H.rows());
  Vec sinr(K);
  for (int k = 0; k < K; ++k) {
    const double signal = std::norm(G(k, k));
    const double interference = G.row(k).cwiseAbs2().sum() - signal;
    sinr[k] = signal / (interference + noise_power[k]);
  }
  return sinr;
}

Vec group_power(const CMat& V, const std::vector<int>& antennas) {
  Vec p(static_cast<Eigen::Index>(antennas.size()));
  int off = 0;
  for (std::size_t l = 0; l < antennas.size(); ++l) {
    p[static_cast<Eigen::Index>(l)] = V.middleRows(off, antennas[l]).squaredNorm();
    off += antennas[l];
  }
  return p;
}

double network_power(const CMat& V, const std::vector<int>& active_set,
                     const NetworkInstance& inst) {
  const int L = inst.num_rrhs();
  if (V.rows() != inst.num_antennas()) throw InvalidArgument("network_power: V must have N rows");
  std::vector<bool> active(L, false);
  for (int l : active_set) {
    if (l < 0 || l >= L) throw InvalidArgument("active set index out of range");
    active[l] = true;
  }
  const Vec gp = group_power(V, inst.antennas);
  double total = 0.0;
  for (int l = 0; l < L; ++l) {
    if (!active[l]) {
      if (gp[l] != 0.0)
        throw InvalidArgument("RRH " + std::to_string(l) + " is inactive but has nonzero beamforming coefficients");
      continue;
    }
    total += gp[l] / inst.power.drain_efficiency[l] + inst.power.fronthaul_w[l];
  }
  return total;
}

}  // namespace cran
