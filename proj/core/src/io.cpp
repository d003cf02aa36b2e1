#include "heatlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace heatlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token) {
  const std::string t = trim(token);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    fail(Errc::invalid_input, "not a number: '" + token + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Endpoint parse_endpoint(const std::string& token) {
  std::string t = trim(token);
  if (t == "reflecting") return Endpoint::reflecting;
  if (t == "absorbing") return Endpoint::absorbing;
  fail(Errc::invalid_input, "endpoint must be 'reflecting' or 'absorbing', got '" + token + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string space_to_json(const DirichletSpace& space) {
  ordered_json doc;
  doc["schema"] = "heatlab-space/1";
  doc["vertices"] = space.size();
  doc["mu"] = json::array();
  for (int x = 0; x < space.size(); ++x) doc["mu"].push_back(space.mu(x));
  doc["edges"] = json::array();
  for (const Edge& e : space.edges()) doc["edges"].push_back({e.u, e.v, e.w});
  doc["killing"] = json::array();
  for (int x = 0; x < space.size(); ++x) doc["killing"].push_back(space.killing(x));
  return doc.dump(2) + "\n";
}

DirichletSpace space_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::invalid_input, std::string("space JSON parse error: ") + e.what());
  }
  try {
    if (doc.contains("schema") && doc["schema"] != "heatlab-space/1")
      fail(Errc::invalid_input,
           "unsupported space schema: " + doc["schema"].dump());
    const int n = doc.at("vertices").get<int>();
    Vector mu(n), killing = Vector::Zero(n);
    const auto& jmu = doc.at("mu");
    if (static_cast<int>(jmu.size()) != n)
      fail(Errc::invalid_input, "mu length does not match vertex count");
    for (int x = 0; x < n; ++x) mu[x] = jmu.at(x).get<double>();
    if (doc.contains("killing")) {
      const auto& jk = doc.at("killing");
      if (static_cast<int>(jk.size()) != n)
        fail(Errc::invalid_input, "killing length does not match vertex count");
      for (int x = 0; x < n; ++x) killing[x] = jk.at(x).get<double>();
    }
    std::vector<Edge> edges;
    for (const auto& je : doc.at("edges")) {
      if (je.size() != 3) fail(Errc::invalid_input, "edge entries must be [u, v, w]");
      edges.push_back({je.at(0).get<int>(), je.at(1).get<int>(), je.at(2).get<double>()});
    }
    return DirichletSpace(std::move(mu), std::move(edges), std::move(killing));
  } catch (const json::exception& e) {
    fail(Errc::invalid_input, std::string("space JSON structure error: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::invalid_input, "cannot open for writing: " + path.string());
  out << text;
  if (!out) fail(Errc::invalid_input, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::invalid_input, "cannot open: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void save_space(const DirichletSpace& space, const std::filesystem::path& path) {
  write_text_file(path, space_to_json(space));
}

DirichletSpace load_space(const std::filesystem::path& path) {
  return space_from_json(read_text_file(path));
}

DirichletSpace parse_space_arg(const std::string& arg) {
  const std::string s = trim(arg);
  const auto open = s.find('(');
  if (open == std::string::npos) return load_space(s);
  if (s.back() != ')') fail(Errc::invalid_input, "unbalanced builder expression: " + s);

  const std::string name = trim(s.substr(0, open));
  std::vector<std::string> args = split(s.substr(open + 1, s.size() - open - 2), ',');
  if (args.size() == 1 && trim(args[0]).empty()) args.clear();

  if (name == "path") {
    if (args.size() < 1 || args.size() > 4)
      fail(Errc::invalid_input, "path(n[,spacing[,left[,right]]])");
    int n = static_cast<int>(parse_number(args[0]));
    double spacing = args.size() > 1 ? parse_number(args[1]) : 1.0;
    Endpoint left = args.size() > 2 ? parse_endpoint(args[2]) : Endpoint::reflecting;
    Endpoint right = args.size() > 3 ? parse_endpoint(args[3]) : Endpoint::reflecting;
    return build_path(n, spacing, left, right);
  }
  if (name == "cycle") {
    if (args.size() < 1 || args.size() > 3) fail(Errc::invalid_input, "cycle(n[,weight[,mu]])");
    int n = static_cast<int>(parse_number(args[0]));
    double weight = args.size() > 1 ? parse_number(args[1]) : 1.0;
    double mu = args.size() > 2 ? parse_number(args[2]) : 1.0;
    return build_cycle(n, weight, mu);
  }
  if (name == "grid") {
    if (args.size() < 2 || args.size() > 3) fail(Errc::invalid_input, "grid(nx,ny[,spacing])");
    int nx = static_cast<int>(parse_number(args[0]));
    int ny = static_cast<int>(parse_number(args[1]));
    double spacing = args.size() > 2 ? parse_number(args[2]) : 1.0;
    return build_grid_2d(nx, ny, spacing).space;
  }
  fail(Errc::invalid_input, "unknown space builder '" + name + "'");
}

void save_solution(const DirichletSpace& space, const SpaceTimeFunction& u,
                   const std::filesystem::path& csv_path) {
  u.validate(space);
  std::ostringstream os;
  os << "t,vertex,value\n";
  for (int i = 0; i < u.time_count(); ++i)
    for (int x = 0; x < u.vertex_count(); ++x)
      os << format_double(u.times[i]) << ',' << x << ',' << format_double(u.values(i, x))
         << '\n';
  write_text_file(csv_path, os.str());

  ordered_json side;
  side["schema"] = "heatlab-solution/1";
  side["space"] = space.hash_hex();
  side["domain"] = u.domain;
  side["nonnegative"] = u.nonnegative;
  write_text_file(csv_path.string() + ".json", side.dump(2) + "\n");
}

SpaceTimeFunction load_solution(const DirichletSpace& space,
                                const std::filesystem::path& csv_path) {
  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,vertex,value")
    fail(Errc::invalid_input, "solution CSV must start with header t,vertex,value");

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 3)
      fail(Errc::invalid_input,
           "solution CSV line " + std::to_string(lineno) + ": expected t,vertex,value");
    double t = parse_number(cols[0]);
    int x = static_cast<int>(parse_number(cols[1]));
    double v = parse_number(cols[2]);
    if (x < 0 || x >= space.size())
      fail(Errc::invalid_input, "solution CSV line " + std::to_string(lineno) +
                                    ": vertex out of range");
    if (times.empty() || t != times.back()) {
      times.push_back(t);
      rows.emplace_back(space.size(), 0.0);
    }
    rows.back()[x] = v;
  }
  if (times.empty()) fail(Errc::invalid_input, "solution CSV has no samples");

  SpaceTimeFunction u;
  u.times = times;
  u.values.resize(times.size(), space.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int x = 0; x < space.size(); ++x) u.values(i, x) = rows[i][x];

  const std::filesystem::path side_path = csv_path.string() + ".json";
  if (std::filesystem::exists(side_path)) {
    json side;
    try {
      side = json::parse(read_text_file(side_path));
      if (side.contains("space") && side["space"].get<std::string>() != space.hash_hex())
        fail(Errc::invalid_input, "solution sidecar was written for a different space");
      if (side.contains("domain")) u.domain = side["domain"].get<std::vector<int>>();
      if (side.contains("nonnegative")) u.nonnegative = side["nonnegative"].get<bool>();
    } catch (const json::exception& e) {
      fail(Errc::invalid_input, std::string("solution sidecar parse error: ") + e.what());
    }
  } else {
    u.nonnegative = u.values.minCoeff() >= 0.0;
  }
  std::sort(u.domain.begin(), u.domain.end());
  u.validate(space);
  return u;
}

void save_measure(const AtomicMeasure& nu, const std::filesystem::path& csv_path) {
  std::ostringstream os;
  os << "vertex,mass\n";
  for (int x = 0; x < nu.size(); ++x)
    if (nu.mass[x] != 0.0) os << x << ',' << format_double(nu.mass[x]) << '\n';
  write_text_file(csv_path, os.str());
}

void dump_kernel(const HeatEngine& engine, const std::vector<double>& times,
                 const std::filesystem::path& csv_path) {
  std::ostringstream os;
  os << "t,x,y,p\n";
  const int n = engine.space().size();
  for (double t : times) {
    Matrix K = engine.kernel_matrix(t);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        os << format_double(t) << ',' << x << ',' << y << ',' << format_double(K(x, y))
           << '\n';
  }
  write_text_file(csv_path, os.str());
}

}  // namespace heatlab
