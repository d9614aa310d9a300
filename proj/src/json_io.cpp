#include "clelab/json_io.hpp"

#include "json.hpp"

namespace clelab {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json cplx_to_json(Cplx z) { return json::array({z.real(), z.imag()}); }

Cplx cplx_from_json(const json& j) {
  return Cplx{j.at(0).get<double>(), j.at(1).get<double>()};
}

json curve_json(const ClosedCurve& c) {
  json j;
  switch (c.kind()) {
    case ClosedCurve::Kind::Circle:
      j["kind"] = "circle";
      j["center"] = cplx_to_json(c.circle_center());
      j["radius"] = c.circle_radius();
      break;
    case ClosedCurve::Kind::Ellipse: {
      const EllipseSpec& e = c.as_ellipse();
      j["kind"] = "ellipse";
      j["center"] = cplx_to_json(e.center);
      j["eps"] = e.eps;
      j["theta"] = e.theta;
      j["b"] = e.b;
      break;
    }
    case ClosedCurve::Kind::Polygon: {
      j["kind"] = "polygon";
      json pts = json::array();
      for (const Cplx& p : c.polygon_vertices()) pts.push_back(cplx_to_json(p));
      j["vertices"] = pts;
      break;
    }
  }
  return j;
}

ClosedCurve curve_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "circle")
    return ClosedCurve::circle(cplx_from_json(j.at("center")),
                               j.at("radius").get<double>());
  if (kind == "ellipse")
    return ClosedCurve::ellipse(
        EllipseSpec(cplx_from_json(j.at("center")), j.at("eps").get<double>(),
                    j.at("theta").get<double>(), j.at("b").get<double>()));
  if (kind == "polygon") {
    std::vector<Cplx> pts;
    for (const auto& p : j.at("vertices")) pts.push_back(cplx_from_json(p));
    return ClosedCurve::polygon(std::move(pts));
  }
  throw std::invalid_argument("curve_from_json: unknown kind " + kind);
}

json region_json(const RegionSpec& r) {
  json j;
  switch (r.kind()) {
    case RegionSpec::Kind::Disk:
      j["kind"] = "disk";
      j["center"] = cplx_to_json(r.center());
      j["radius"] = r.radius();
      break;
    case RegionSpec::Kind::Annulus:
      j["kind"] = "annulus";
      j["center"] = cplx_to_json(r.center());
      j["r_inner"] = r.r_inner();
      j["r_outer"] = r.r_outer();
      break;
    case RegionSpec::Kind::Polygon: {
      j["kind"] = "polygon";
      json pts = json::array();
      for (const Cplx& p : r.vertices()) pts.push_back(cplx_to_json(p));
      j["vertices"] = pts;
      break;
    }
    case RegionSpec::Kind::FullPlaneProxy:
      j["kind"] = "plane";
      j["radius"] = r.radius();
      break;
    case RegionSpec::Kind::ExteriorProxy:
      j["kind"] = "exterior";
      j["inner"] = curve_json(r.inner_curve());
      j["radius"] = r.radius();
      break;
  }
  return j;
}

RegionSpec region_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "disk")
    return RegionSpec::disk(cplx_from_json(j.at("center")),
                            j.at("radius").get<double>());
  if (kind == "annulus")
    return RegionSpec::annulus(cplx_from_json(j.at("center")),
                               j.at("r_inner").get<double>(),
                               j.at("r_outer").get<double>());
  if (kind == "polygon") {
    std::vector<Cplx> pts;
    for (const auto& p : j.at("vertices")) pts.push_back(cplx_from_json(p));
    return RegionSpec::polygon(std::move(pts));
  }
  if (kind == "plane")
    return RegionSpec::full_plane_proxy(j.at("radius").get<double>());
  if (kind == "exterior")
    return RegionSpec::exterior_proxy(curve_from(j.at("inner")),
                                      j.at("radius").get<double>());
  throw std::invalid_argument("region_from_json: unknown kind " + kind);
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t block = std::uint32_t(bytes[i]) << 16;
    int have = 1;
    if (i + 1 < bytes.size()) {
      block |= std::uint32_t(bytes[i + 1]) << 8;
      ++have;
    }
    if (i + 2 < bytes.size()) {
      block |= bytes[i + 2];
      ++have;
    }
    out.push_back(kB64Alphabet[(block >> 18) & 63]);
    out.push_back(kB64Alphabet[(block >> 12) & 63]);
    out.push_back(have > 1 ? kB64Alphabet[(block >> 6) & 63] : '=');
    out.push_back(have > 2 ? kB64Alphabet[block & 63] : '=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw std::invalid_argument("base64_decode: bad character");
  };
  if (text.size() % 4 != 0)
    throw std::invalid_argument("base64_decode: truncated input");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      v[k] = value_of(text[i + std::size_t(k)]);
      if (v[k] < 0) {
        v[k] = 0;
        ++pad;
      }
    }
    const std::uint32_t block = (std::uint32_t(v[0]) << 18) |
                                (std::uint32_t(v[1]) << 12) |
                                (std::uint32_t(v[2]) << 6) | std::uint32_t(v[3]);
    out.push_back(std::uint8_t(block >> 16));
    if (pad < 2) out.push_back(std::uint8_t(block >> 8));
    if (pad < 1) out.push_back(std::uint8_t(block));
  }
  return out;
}

std::string region_to_json(const RegionSpec& region) {
  return region_json(region).dump();
}

RegionSpec region_from_json(const std::string& text) {
  return region_from(json::parse(text));
}

std::string lattice_to_json(const HexLattice& lat) {
  json j;
  j["version"] = kFormatVersion;
  j["region"] = region_json(lat.region());
  j["spacing"] = lat.spacing();
  j["hash"] = lat.hash();
  json faces = json::array();
  for (const auto& f : lat.faces()) faces.push_back(json::array({f.q, f.r}));
  j["faces_axial"] = faces;
  return j.dump();
}

HexLattice lattice_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != kFormatVersion)
    throw std::invalid_argument("lattice_from_json: unsupported version");
  HexLattice lat(region_from(j.at("region")), j.at("spacing").get<double>());
  if (lat.hash() != j.at("hash").get<std::uint64_t>())
    throw std::invalid_argument("lattice_from_json: hash mismatch");
  const auto& faces = j.at("faces_axial");
  if (int(faces.size()) != lat.n_faces())
    throw std::invalid_argument("lattice_from_json: face count mismatch");
  for (int i = 0; i < lat.n_faces(); ++i) {
    if (faces[std::size_t(i)][0].get<int>() != lat.faces()[std::size_t(i)].q ||
        faces[std::size_t(i)][1].get<int>() != lat.faces()[std::size_t(i)].r)
      throw std::invalid_argument("lattice_from_json: face list mismatch");
  }
  return lat;
}

std::string config_to_json(const LoopConfig& cfg) {
  json j;
  j["version"] = kFormatVersion;
  j["lattice_hash"] = cfg.lattice().hash();
  j["occupancy_b64"] = base64_encode(cfg.occupancy());
  return j.dump();
}

void config_from_json(const std::string& text, LoopConfig* cfg) {
  const json j = json::parse(text);
  if (j.at("lattice_hash").get<std::uint64_t>() != cfg->lattice().hash())
    throw std::invalid_argument("config_from_json: lattice hash mismatch");
  cfg->set_occupancy(base64_decode(j.at("occupancy_b64").get<std::string>()));
}

std::string checkpoint_to_json(const ChainState& st, const MCParams& mc) {
  json j;
  j["version"] = kFormatVersion;
  j["lattice_hash"] = st.lattice().hash();
  j["mc"] = {{"seed", mc.seed},
             {"thermalization_sweeps", mc.thermalization_sweeps},
             {"measurement_sweeps", mc.measurement_sweeps},
             {"measure_every", mc.measure_every},
             {"enable_topological_move", mc.enable_topological_move},
             {"chains", mc.chains}};
  j["chain"] = {{"chain_index", st.chain_index()},
                {"sweep_count", st.sweep_count()},
                {"occupancy_b64", base64_encode(st.config().occupancy())}};
  j["rng"] = {{"seed", st.rng().seed()},
              {"chain", st.rng().chain_index()},
              {"block", st.rng().block()},
              {"pos", st.rng().buffer_pos()}};
  return j.dump();
}

void checkpoint_restore(const std::string& text, const HexLattice& lat,
                        ChainState* st, MCParams* mc) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != kFormatVersion)
    throw std::invalid_argument("checkpoint_restore: unsupported version");
  if (j.at("lattice_hash").get<std::uint64_t>() != lat.hash())
    throw std::invalid_argument(
        "checkpoint_restore: lattice hash mismatch; refusing to resume");
  const json& m = j.at("mc");
  mc->seed = m.at("seed").get<std::uint64_t>();
  mc->thermalization_sweeps = m.at("thermalization_sweeps").get<int>();
  mc->measurement_sweeps = m.at("measurement_sweeps").get<int>();
  mc->measure_every = m.at("measure_every").get<int>();
  mc->enable_topological_move = m.at("enable_topological_move").get<bool>();
  mc->chains = m.at("chains").get<int>();
  const json& c = j.at("chain");
  const json& r = j.at("rng");
  *st = ChainState(lat, r.at("seed").get<std::uint64_t>(),
                   c.at("chain_index").get<std::uint64_t>());
  st->restore(base64_decode(c.at("occupancy_b64").get<std::string>()),
              PhiloxRng::restore(r.at("seed").get<std::uint64_t>(),
                                 r.at("chain").get<std::uint64_t>(),
                                 r.at("block").get<std::uint64_t>(),
                                 r.at("pos").get<int>()),
              c.at("sweep_count").get<long>());
}

std::string event_to_json(const EventSpec& e) {
  json j;
  switch (e.kind()) {
    case EventSpec::Kind::Sure:
      j["kind"] = "sure";
      break;
    case EventSpec::Kind::WindingLoopIn:
      j["kind"] = "winding_loop_in";
      j["outer"] = curve_json(e.annulus().outer);
      j["inner"] = curve_json(e.annulus().inner);
      break;
    case EventSpec::Kind::Separation: {
      j["kind"] = "separation";
      json g1 = json::array(), g2 = json::array();
      for (const Cplx& p : e.group1()) g1.push_back(cplx_to_json(p));
      for (const Cplx& p : e.group2()) g2.push_back(cplx_to_json(p));
      j["group1"] = g1;
      j["group2"] = g2;
      break;
    }
    case EventSpec::Kind::SurroundPair:
      j["kind"] = "surround_pair";
      j["z1"] = cplx_to_json(e.z1());
      j["z2"] = cplx_to_json(e.z2());
      j["min_count"] = e.min_count();
      break;
  }
  return j.dump();
}

EventSpec event_from_json(const std::string& text) {
  const json j = json::parse(text);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sure") return EventSpec::sure();
  if (kind == "winding_loop_in")
    return EventSpec::winding_loop_in(
        AnnulusSpec(curve_from(j.at("outer")), curve_from(j.at("inner"))));
  if (kind == "separation") {
    std::vector<Cplx> g1, g2;
    for (const auto& p : j.at("group1")) g1.push_back(cplx_from_json(p));
    for (const auto& p : j.at("group2")) g2.push_back(cplx_from_json(p));
    return EventSpec::separation(std::move(g1), std::move(g2));
  }
  if (kind == "surround_pair")
    return EventSpec::surround_pair(cplx_from_json(j.at("z1")),
                                    cplx_from_json(j.at("z2")),
                                    j.at("min_count").get<int>());
  throw std::invalid_argument("event_from_json: unknown kind " + kind);
}

std::string curve_to_json(const ClosedCurve& c) { return curve_json(c).dump(); }

ClosedCurve curve_from_json(const std::string& text) {
  return curve_from(json::parse(text));
}

}  // namespace clelab
