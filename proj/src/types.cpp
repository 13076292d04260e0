#include "mdma/types.hpp"

#include <algorithm>
#include <map>

namespace mdma {

const char* to_string(ServiceType t) {
  switch (t) {
    case ServiceType::Comm: return "comm";
    case ServiceType::Pos: return "pos";
    case ServiceType::Sense: return "sense";
  }
  return "?";
}

ServiceType service_type_from_string(const std::string& s) {
  if (s == "comm") return ServiceType::Comm;
  if (s == "pos") return ServiceType::Pos;
  if (s == "sense") return ServiceType::Sense;
  throw std::invalid_argument("unknown service type: " + s);
}

void KpiSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("KPI alpha must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("KPI beta must be in (0, 1)");
  if (!(target > 0.0)) throw std::invalid_argument("KPI target must be > 0");
  if (!(weight >= 0.0)) throw std::invalid_argument("KPI weight must be >= 0");
}

std::vector<int> Assignment::users_in(int m, int n) const {
  std::vector<int> out;
  for (int k = 0; k < num_users(); ++k)
    if (a(k, m, n)) out.push_back(k);
  return out;
}

std::vector<int> Assignment::users_in_frame(int n) const {
  std::vector<int> out;
  for (int k = 0; k < num_users(); ++k)
    if (rb_[k] && rb_[k]->n == n) out.push_back(k);
  return out;
}

int Assignment::count_in(int m, int n) const {
  return static_cast<int>(std::count_if(rb_.begin(), rb_.end(), [&](const auto& r) {
    return r && r->m == m && r->n == n;
  }));
}

std::vector<int> Assignment::unassigned() const {
  std::vector<int> out;
  for (int k = 0; k < num_users(); ++k)
    if (!rb_[k]) out.push_back(k);
  return out;
}

bool Assignment::respects_cap(int a_max) const {
  std::map<Rb, int> count;
  for (const auto& r : rb_) {
    if (!r) continue;
    if (r->m < 0 || r->m >= bands_ || r->n < 0 || r->n >= frames_) return false;
    if (++count[*r] > a_max) return false;
  }
  return true;
}

int SubframeAssignment::band_of(int k) const {
  for (size_t i = 0; i < users.size(); ++i)
    if (users[i] == k) return bands[i];
  return -1;
}

SubframeAssignment slice(const Assignment& a, int n) {
  SubframeAssignment out;
  out.n = n;
  for (int k : a.users_in_frame(n)) {
    out.users.push_back(k);
    out.bands.push_back(a.rb(k)->m);
  }
  return out;
}

}  // namespace mdma
