#include "reach/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>

namespace reach {

namespace {

class OutFile
{
public:
  explicit OutFile(const std::filesystem::path& path) : f_(std::fopen(path.c_str(), "wb"), &std::fclose)
  {
    if (!f_) throw InvalidArgument("cannot write " + path.string());
  }

  void write(std::string& buf, bool force = false)
  {
    if (!force && buf.size() < (1u << 20)) return;
    if (std::fwrite(buf.data(), 1, buf.size(), f_.get()) != buf.size()) throw InvalidArgument("write failed");
    buf.clear();
  }

private:
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f_;
};

void append_int(std::string& out, long long v)
{
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_row(std::string& out, long long id, std::size_t stage, double t, const Vec6& x, const Vec3& a,
                double mass)
{
  append_int(out, id);
  out += ',';
  append_int(out, static_cast<long long>(stage));
  out += ',';
  append_double(out, t);
  for (int i = 0; i < 6; ++i) {
    out += ',';
    append_double(out, x[i]);
  }
  for (int i = 0; i < 3; ++i) {
    out += ',';
    append_double(out, a[i]);
  }
  out += ',';
  append_double(out, mass);
}

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    std::string cell = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void append_double(std::string& out, double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::string format_double(double v)
{
  std::string s;
  append_double(s, v);
  return s;
}

double parse_double(const std::string& text)
{
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw InvalidArgument("not a number: '" + text + "'");
  return v;
}

void write_trajectories(const std::filesystem::path& path, const ReachableSet& set)
{
  const ReferenceTrajectory& ref = *set.reference;
  const std::size_t n = ref.size();
  const double t_end = ref.t0 + ref.horizon();
  OutFile f(path);
  std::string buf = kTrajectoryHeader;
  buf += '\n';
  for (const auto& s : set.samples) {
    if (!s.ok()) continue;
    const auto id = static_cast<long long>(s.id);
    if (s.states.size() == n + 1) {
      for (std::size_t i = 0; i <= n; ++i) {
        const double t = i < n ? ref.stages[i].t : t_end;
        const Vec3 a = i < n ? s.controls[i] : Vec3::Zero();
        append_row(buf, id, i, t, s.states[i].x, a, s.masses[i]);
        buf += '\n';
      }
    } else {
      append_row(buf, id, n, t_end, s.terminal.x, Vec3::Zero(), s.terminal_mass);
      buf += '\n';
    }
    f.write(buf);
  }
  f.write(buf, true);
}

void write_terminals(const std::filesystem::path& path, const ReachableSet& set)
{
  OutFile f(path);
  std::string buf = kTerminalHeader;
  buf += '\n';
  for (const auto& s : set.samples) {
    if (!s.ok()) continue;
    for (int space = 0; space < 2; ++space) {
      append_int(buf, static_cast<long long>(s.id));
      buf += space == 0 ? ",position" : ",velocity";
      const Vec3 c = space == 0 ? s.terminal.r() : s.terminal.v();
      for (int k = 0; k < 3; ++k) {
        buf += ',';
        append_double(buf, c[k]);
      }
      buf += '\n';
    }
    f.write(buf);
  }
  f.write(buf, true);
}

void write_reference(const std::filesystem::path& path, const ReferenceTrajectory& ref)
{
  OutFile f(path);
  std::string buf = kTrajectoryHeader;
  buf += '\n';
  for (const auto& st : ref.stages) {
    append_row(buf, -1, st.index, st.t, st.x_ref.x, Vec3::Zero(), st.m_ref);
    buf += '\n';
  }
  const double t_end = ref.t0 + ref.horizon();
  append_row(buf, -1, ref.size(), t_end, ref.x_terminal.x, Vec3::Zero(), ref.mass.mass_at(t_end, ref.t0));
  buf += '\n';
  f.write(buf, true);
}

void write_manifolds(const std::filesystem::path& path, const ManifoldSet& set, double dt_per_interval)
{
  OutFile f(path);
  std::string buf = kTrajectoryHeader;
  buf += ",branch,s\n";
  for (const auto& b : set.branches) {
    const double sign = b.kind == ManifoldKind::Stable ? -1.0 : 1.0;
    for (std::size_t i = 0; i < b.trajectories.size(); ++i) {
      const auto& traj = b.trajectories[i];
      for (std::size_t k = 0; k < traj.size(); ++k) {
        append_row(buf, static_cast<long long>(i), k, sign * dt_per_interval * static_cast<double>(k),
                   traj[k].x, Vec3::Zero(), 1.0);
        buf += ',';
        buf += to_string(b.kind);
        buf += b.s > 0 ? ",1\n" : ",-1\n";
      }
      f.write(buf);
    }
  }
  f.write(buf, true);
}

int CsvTable::column(const std::string& name) const
{
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " fields, header has " +
                            std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw InvalidArgument(path.string() + ": missing header");
  return t;
}

std::vector<TargetState> read_targets(const std::filesystem::path& path)
{
  const CsvTable t = read_csv(path);
  const int cx = t.column("x");
  const int cy = t.column("y");
  const int cz = t.column("z");
  if (cx < 0 || cy < 0 || cz < 0) throw InvalidArgument(path.string() + ": target file needs x,y,z columns");
  const int cvx = t.column("vx");
  const int cvy = t.column("vy");
  const int cvz = t.column("vz");
  const bool has_v = cvx >= 0 && cvy >= 0 && cvz >= 0;
  const int cid = t.column("sample_id");
  const int ct = t.column("t_days") >= 0 ? t.column("t_days") : t.column("t");

  std::vector<std::size_t> picks;
  if (cid >= 0) {
    // Trajectory file: last row of every sample, in order of first appearance.
    std::map<std::string, std::size_t> last;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto& id = t.rows[i][cid];
      if (!last.count(id)) order.push_back(id);
      last[id] = i;
    }
    for (const auto& id : order) picks.push_back(last[id]);
  } else {
    for (std::size_t i = 0; i < t.rows.size(); ++i) picks.push_back(i);
  }
  if (picks.empty()) throw InvalidArgument(path.string() + ": no target rows");

  std::vector<TargetState> out;
  for (std::size_t i : picks) {
    const auto& row = t.rows[i];
    TargetState s;
    s.r = Vec3(parse_double(row[cx]), parse_double(row[cy]), parse_double(row[cz]));
    if (has_v) s.v = Vec3(parse_double(row[cvx]), parse_double(row[cvy]), parse_double(row[cvz]));
    if (cid >= 0) {
      s.label = "sample " + row[cid];
    } else if (ct >= 0) {
      s.label = t.header[ct] + "=" + row[ct];
    } else {
      s.label = "row " + std::to_string(i + 1);
    }
    out.push_back(std::move(s));
  }
  return out;
}

TerminalClouds read_terminals(const std::filesystem::path& path)
{
  const CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"sample_id", "space", "c0", "c1", "c2"}) {
    throw InvalidArgument(path.string() + ": expected header " + kTerminalHeader);
  }
  TerminalClouds c;
  c.position.space = CloudSpace::Position;
  c.velocity.space = CloudSpace::Velocity;
  c.position.source = c.velocity.source = path.string();
  for (const auto& row : t.rows) {
    const Vec3 p(parse_double(row[2]), parse_double(row[3]), parse_double(row[4]));
    const auto id = static_cast<std::size_t>(std::stoull(row[0]));
    if (row[1] == "position") {
      c.position.points.push_back(p);
      c.position.sample_ids.push_back(id);
    } else if (row[1] == "velocity") {
      c.velocity.points.push_back(p);
      c.velocity.sample_ids.push_back(id);
    } else {
      throw InvalidArgument(path.string() + ": unknown space '" + row[1] + "'");
    }
  }
  return c;
}

}  // namespace reach
