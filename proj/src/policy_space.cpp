#include "vbs/policy_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vbs {

namespace {

template <typename T>
void require_strictly_increasing(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string(name) + " set is empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1]))
      throw std::invalid_argument(std::string(name) +
                                  " set must be strictly increasing");
}

template <typename T>
std::size_t position_of(const std::vector<T>& v, T value, const char* field) {
  auto it = std::find(v.begin(), v.end(), value);
  if (it == v.end()) {
    std::ostringstream os;
    os << field << " value " << value << " is not a member of the policy space";
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

PolicySpace::PolicySpace(std::vector<double> tx_power_dl,
                         std::vector<int> mcs_dl, std::vector<double> prb_dl,
                         std::vector<int> mcs_ul, std::vector<double> prb_ul)
    : p_dl_(std::move(tx_power_dl)),
      m_dl_(std::move(mcs_dl)),
      b_dl_(std::move(prb_dl)),
      m_ul_(std::move(mcs_ul)),
      b_ul_(std::move(prb_ul)) {
  require_strictly_increasing(p_dl_, "tx_power_dl");
  require_strictly_increasing(m_dl_, "mcs_dl");
  require_strictly_increasing(b_dl_, "prb_ratio_dl");
  require_strictly_increasing(m_ul_, "mcs_ul");
  require_strictly_increasing(b_ul_, "prb_ratio_ul");
  for (double b : b_dl_)
    if (b < 0.0 || b > 1.0)
      throw std::invalid_argument("prb_ratio_dl values must lie in [0, 1]");
  for (double b : b_ul_)
    if (b < 0.0 || b > 1.0)
      throw std::invalid_argument("prb_ratio_ul values must lie in [0, 1]");
  size_ = p_dl_.size() * m_dl_.size() * b_dl_.size() * m_ul_.size() * b_ul_.size();
}

Policy PolicySpace::policy_at(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("policy index out of range");
  const std::size_t nb_u = b_ul_.size();
  const std::size_t nm_u = m_ul_.size();
  const std::size_t nb_d = b_dl_.size();
  const std::size_t nm_d = m_dl_.size();
  const std::size_t ib_u = index % nb_u;
  index /= nb_u;
  const std::size_t im_u = index % nm_u;
  index /= nm_u;
  const std::size_t ib_d = index % nb_d;
  index /= nb_d;
  const std::size_t im_d = index % nm_d;
  index /= nm_d;
  return Policy{p_dl_[index], m_dl_[im_d], b_dl_[ib_d], m_ul_[im_u],
                b_ul_[ib_u]};
}

std::size_t PolicySpace::index_of(const Policy& p) const {
  const std::size_t ip = position_of(p_dl_, p.tx_power_dl, "tx_power_dl");
  const std::size_t im_d = position_of(m_dl_, p.mcs_dl, "mcs_dl");
  const std::size_t ib_d = position_of(b_dl_, p.prb_ratio_dl, "prb_ratio_dl");
  const std::size_t im_u = position_of(m_ul_, p.mcs_ul, "mcs_ul");
  const std::size_t ib_u = position_of(b_ul_, p.prb_ratio_ul, "prb_ratio_ul");
  return (((ip * m_dl_.size() + im_d) * b_dl_.size() + ib_d) * m_ul_.size() +
          im_u) *
             b_ul_.size() +
         ib_u;
}

PolicySpace::ComboIndex PolicySpace::combo_of(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("policy index out of range");
  const std::size_t nb_u = b_ul_.size();
  const std::size_t nm_u = m_ul_.size();
  const std::size_t nb_d = b_dl_.size();
  const std::size_t nm_d = m_dl_.size();
  const std::size_t ib_u = index % nb_u;
  index /= nb_u;
  const std::size_t im_u = index % nm_u;
  index /= nm_u;
  const std::size_t ib_d = index % nb_d;
  index /= nb_d;
  const std::size_t im_d = index % nm_d;
  return ComboIndex{im_d * nb_d + ib_d, im_u * nb_u + ib_u};
}

PolicySpace build_paper_space() {
  return PolicySpace({3.0}, {0, 5, 11, 16, 22, 27}, {0.0, 0.2, 0.6, 0.8, 1.0},
                     {0, 5, 9, 14, 18, 23}, {0.01, 0.2, 0.4, 0.6, 0.8, 1.0});
}

PolicySpace build_paper16_space() {
  return PolicySpace({3.0}, {0, 27}, {0.0, 1.0}, {0, 23}, {0.01, 1.0});
}

}  // namespace vbs
