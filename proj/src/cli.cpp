#include "graphflow/cli.hpp"

#include "graphflow/fat_graph.hpp"
#include "graphflow/operations.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace graphflow::cli {

namespace {

std::string g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_point(const Manifold& m, const P3& p) {
    std::string s = g12(p[0]) + "," + g12(p[1]);
    if (m.ambient() == 3) s += "," + g12(p[2]);
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
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

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& tok : split(s, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw domain_error("bad number in list: " + tok);
        }
    }
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    for (const std::string& tok : split(s, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stoi(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw domain_error("bad integer in list: " + tok);
        }
    }
    return out;
}

std::map<std::string, std::string> parse_matching(const std::string& s) {
    std::map<std::string, std::string> out;
    for (const std::string& tok : split(s, ',')) {
        auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == tok.size())
            throw domain_error("matching wants <out-leaf>=<in-leaf>: " + tok);
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

int crit_index(const std::string& crit_id) {
    auto dot = crit_id.find('.');
    if (crit_id.size() < 2 || crit_id[0] != 'i' || dot == std::string::npos)
        throw invariant_error("malformed critical point id: " + crit_id);
    return std::stoi(crit_id.substr(1, dot - 1));
}

// writes to `path` when nonempty, otherwise to the fallback stream
class Sink {
  public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw domain_error("cannot open output file: " + path);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

  private:
    std::ofstream file_;
    std::ostream* out_;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string svg_trajectory(const Manifold& m, const Trajectory& tr) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" ";
    auto polyline = [&](const std::vector<std::pair<double, double>>& pts) {
        if (pts.size() < 2) return;
        svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.005\" points=\"";
        for (size_t i = 0; i < pts.size(); i++) {
            if (i) svg << " ";
            svg << g12(pts[i].first) << "," << g12(pts[i].second);
        }
        svg << "\"/>\n";
    };
    if (m.ambient() == 2) {
        // unit square, y up; runs split where the path wraps around
        svg << "viewBox=\"0 0 1 1\">\n";
        svg << "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\" "
               "stroke=\"#888888\" stroke-width=\"0.003\"/>\n";
        std::vector<std::pair<double, double>> run;
        P3 prev{};
        bool have = false;
        for (const auto& [t, p] : tr.samples) {
            (void)t;
            if (have &&
                (std::fabs(p[0] - prev[0]) > 0.5 || std::fabs(p[1] - prev[1]) > 0.5)) {
                polyline(run);
                run.clear();
            }
            run.push_back({p[0], 1.0 - p[1]});
            prev = p;
            have = true;
        }
        polyline(run);
    } else {
        // orthographic projection along +z
        svg << "viewBox=\"-1.1 -1.1 2.2 2.2\">\n";
        svg << "<rect x=\"-1.1\" y=\"-1.1\" width=\"2.2\" height=\"2.2\" fill=\"white\"/>\n";
        svg << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#888888\" "
               "stroke-width=\"0.006\"/>\n";
        std::vector<std::pair<double, double>> run;
        for (const auto& [t, p] : tr.samples) {
            (void)t;
            run.push_back({p[0], -p[1]});
        }
        polyline(run);
    }
    svg << "</svg>\n";
    return svg.str();
}

struct DispatchState {
    std::ostream* out;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"graph flow tables over a catalog of closed surfaces"};
    app.require_subcommand(1);

    // graph ------------------------------------------------------------
    auto* graph_cmd = app.add_subcommand("graph", "oriented graph analyses");
    graph_cmd->require_subcommand(1);
    {
        auto* info = graph_cmd->add_subcommand("info", "first Betti number, Euler "
                                                       "characteristic, automorphism count");
        auto file = std::make_shared<std::string>();
        info->add_option("file", *file, "graph file")->required();
        info->callback([&out, file] {
            OrientedGraph g = load_graph(*file);
            auto be = betti_and_euler(g);
            auto aut = compute_automorphisms(g);
            out << "b1=" << be.b1 << " chi=" << be.chi << " aut=" << aut.order() << "\n";
        });
    }

    // fat ----------------------------------------------------------------
    auto* fat_cmd = app.add_subcommand("fat", "fat graph analyses");
    fat_cmd->require_subcommand(1);
    {
        auto* cyc = fat_cmd->add_subcommand("cycles", "boundary cycles in canonical form");
        auto file = std::make_shared<std::string>();
        cyc->add_option("file", *file, "fat graph file")->required();
        cyc->callback([&out, file] {
            FatGraph fg = load_fat_graph(*file);
            auto part = boundary_cycles(fg);
            for (size_t i = 0; i < part.cycles.size(); i++) {
                out << "cycle " << i << ":";
                for (const auto& o : part.cycles[i]) out << " " << to_string(o);
                out << "\n";
            }
        });

        auto* gen = fat_cmd->add_subcommand("genus", "genus and boundary count of the "
                                                     "thickened surface");
        auto gfile = std::make_shared<std::string>();
        gen->add_option("file", *gfile, "fat graph file")->required();
        gen->callback([&out, gfile] {
            FatGraph fg = load_fat_graph(*gfile);
            auto inv = surface_invariants(fg);
            out << "genus=" << inv.genus << " boundary=" << inv.boundary << " chi=" << inv.chi
                << "\n";
        });

        auto* chord = fat_cmd->add_subcommand("chord", "check the chord-diagram condition "
                                                       "against the in/out marks");
        auto cfile = std::make_shared<std::string>();
        chord->add_option("file", *cfile, "marked fat graph file")->required();
        chord->callback([&out, cfile] {
            FatGraph fg = load_fat_graph(*cfile);
            auto rep = is_chord_diagram(fg);
            out << "chord=" << (rep.ok ? "yes" : "no") << "\n";
            for (const auto& v : rep.violations) out << "violation " << v << "\n";
        });
    }

    // glue ---------------------------------------------------------------
    {
        auto* glue_cmd = app.add_subcommand("glue", "glue outgoing leaves of the first graph "
                                                    "to incoming leaves of the second");
        auto g1 = std::make_shared<std::string>();
        auto g2 = std::make_shared<std::string>();
        auto match = std::make_shared<std::string>();
        auto outfile = std::make_shared<std::string>();
        glue_cmd->add_option("first", *g1, "graph file")->required();
        glue_cmd->add_option("second", *g2, "graph file")->required();
        glue_cmd->add_option("--match", *match, "comma list <out-leaf>=<in-leaf>")->required();
        glue_cmd->add_option("-o,--output", *outfile, "write the glued graph here");
        glue_cmd->callback([&out, g1, g2, match, outfile] {
            OrientedGraph a = load_graph(*g1);
            OrientedGraph b = load_graph(*g2);
            OrientedGraph g = glue(a, b, parse_matching(*match));
            Sink sink(*outfile, out);
            sink.stream() << format_graph(g);
        });
    }

    // simplex --------------------------------------------------------------
    {
        auto* sim = app.add_subcommand("simplex", "evaluate the simplex metric of a collapse "
                                                  "chain: simplex t=<comma-list> "
                                                  "chain=<coarsest,...,finest>");
        auto targ = std::make_shared<std::string>();
        auto charg = std::make_shared<std::string>();
        sim->add_option("t", *targ, "t=<comma list of weights, one per chain graph>")
            ->required();
        sim->add_option("chain", *charg,
                        "chain=<graph files, most-collapsed first; the metric lives on the "
                        "last>")
            ->required();
        sim->callback([&out, targ, charg] {
            if (targ->rfind("t=", 0) != 0) throw domain_error("first argument wants t=...");
            if (charg->rfind("chain=", 0) != 0)
                throw domain_error("second argument wants chain=...");
            std::vector<double> t = parse_doubles(targ->substr(2));
            std::vector<std::string> files = split(charg->substr(6), ',');
            if (files.empty() || files[0].empty()) throw domain_error("empty chain");
            std::vector<OrientedGraph> graphs;
            for (const auto& f : files) graphs.push_back(load_graph(f));
            SimplexPoint p;
            p.graph = graphs.back();
            p.t = t;
            for (size_t j = 0; j + 1 < graphs.size(); j++) {
                // chain[j] collapses G_{k-j} onto G_{k-j-1}
                size_t k = graphs.size() - 1;
                GraphMorphism m = infer_collapse_morphism(graphs[k - j], graphs[k - j - 1]);
                auto issues = validate_morphism(m);
                if (!issues.empty())
                    throw domain_error("chain step " + std::to_string(j) +
                                       " is not a collapse: " + issues.front());
                p.chain.push_back(std::move(m));
            }
            auto res = simplex_metric(p);
            out << format_structure(res.metric);
            for (const auto& e : res.zero_edges) out << "zero " << e << "\n";
        });
    }

    // morse ----------------------------------------------------------------
    auto* morse_cmd = app.add_subcommand("morse", "critical points, boundary counts, homology");
    morse_cmd->require_subcommand(1);
    {
        auto cfg = std::make_shared<std::string>();
        auto key = std::make_shared<std::string>();
        auto* cx = morse_cmd->add_subcommand("complex", "critical point inventory and "
                                                        "connecting counts");
        cx->add_option("--config", *cfg, "backend config file")->required();
        cx->add_option("--function", *key, "catalog key (defaults to the primary)");
        cx->callback([&out, cfg, key] {
            Backend bk = load_backend_config(*cfg);
            MorseBackend mb = make_morse_backend(bk, key->empty() ? bk.primary : *key);
            MorseComplex mc = morse_complex(mb);
            for (const auto& p : mc.points)
                out << "point " << p.id << " index=" << p.index << " value=" << g12(p.value)
                    << " at=(" << fmt_point(mb.manifold, p.location) << ")\n";
            for (const auto& [pair, raw] : mc.counts)
                out << "count " << pair.first << " " << pair.second << " raw=" << raw
                    << " mod2=" << raw % 2 << "\n";
        });

        auto hcfg = std::make_shared<std::string>();
        auto hkey = std::make_shared<std::string>();
        auto* hom = morse_cmd->add_subcommand("homology", "mod-2 homology ranks per degree");
        hom->add_option("--config", *hcfg, "backend config file")->required();
        hom->add_option("--function", *hkey, "catalog key (defaults to the primary)");
        hom->callback([&out, hcfg, hkey] {
            Backend bk = load_backend_config(*hcfg);
            MorseBackend mb = make_morse_backend(bk, hkey->empty() ? bk.primary : *hkey);
            auto ranks = homology_ranks(morse_complex(mb));
            out << "ranks:";
            for (int r : ranks) out << " " << r;
            out << "\n";
        });
    }

    // flow -----------------------------------------------------------------
    auto* flow_cmd = app.add_subcommand("flow", "graph flow solving");
    flow_cmd->require_subcommand(1);
    {
        auto* solve = flow_cmd->add_subcommand("solve", "solve the constrained flow problem "
                                                        "for a metric structure");
        auto sfile = std::make_shared<std::string>();
        auto cfg = std::make_shared<std::string>();
        auto solver = std::make_shared<std::string>();
        auto outfile = std::make_shared<std::string>();
        solve->add_option("structure", *sfile, "metric structure file")->required();
        solve->add_option("--config", *cfg, "backend config file")->required();
        solve->add_option("--solver", *solver, "solver config file (seeds, tolerances, "
                                               "constraints)");
        solve->add_option("-o,--output", *outfile, "write the CSV here");
        solve->callback([&out, sfile, cfg, solver, outfile] {
            MetricStructure s = load_structure(*sfile);
            Backend bk = load_backend_config(*cfg);
            std::vector<LeafConstraint> cons;
            if (!solver->empty()) {
                SolverConfig sc = load_solver_config(*solver);
                sc.apply(bk.tol);
                cons = sc.constraints;
            }
            FlowProblem prob(s, bk, cons);
            SolveResult r = prob.solve();
            Sink sink(*outfile, out);
            std::ostream& os = sink.stream();
            os << (bk.manifold.ambient() == 2 ? "x1,x2" : "x1,x2,x3") << ",residual,limits\n";
            for (const auto& f : r.flows) {
                os << fmt_point(bk.manifold, f.x) << "," << g12(f.residual_norm) << ",";
                bool first = true;
                for (const auto& [leaf, crit] : f.leaf_limits) {
                    if (!first) os << ";";
                    os << leaf << "=" << crit;
                    first = false;
                }
                os << "\n";
            }
            os << "status=" << r.status;
            if (r.status == "family") os << " dim=" << r.family_dim;
            os << " count=" << r.count() << " mod2=" << r.count_mod2() << "\n";
        });
    }

    // op ---------------------------------------------------------------------
    auto* op_cmd = app.add_subcommand("op", "operation tables and their laws");
    op_cmd->require_subcommand(1);
    {
        auto* table = op_cmd->add_subcommand("table", "mod-2 operation table of a structure");
        auto sfile = std::make_shared<std::string>();
        auto cfg = std::make_shared<std::string>();
        auto outfile = std::make_shared<std::string>();
        table->add_option("structure", *sfile, "metric structure file")->required();
        table->add_option("--config", *cfg, "backend config file")->required();
        table->add_option("-o,--output", *outfile, "write the CSV here");
        table->callback([&out, sfile, cfg, outfile] {
            MetricStructure s = load_structure(*sfile);
            Backend bk = load_backend_config(*cfg);
            OperationTable t = build_operation_table(s, bk);
            Sink sink(*outfile, out);
            std::ostream& os = sink.stream();
            os << "in,out,in_indices,out_indices,expdim,count_mod2,status\n";
            size_t nin = t.in_leaves.size();
            for (const auto& [tup, e] : t.entries) {
                std::string in, outp, iin, iout;
                for (size_t i = 0; i < tup.size(); i++) {
                    std::string& tgt = i < nin ? in : outp;
                    std::string& idx = i < nin ? iin : iout;
                    if (!tgt.empty()) tgt += ";";
                    if (!idx.empty()) idx += ";";
                    tgt += tup[i];
                    idx += std::to_string(crit_index(tup[i]));
                }
                os << in << "," << outp << "," << iin << "," << iout << "," << e.expdim << ","
                   << e.count << "," << e.status << "\n";
            }
        });

        auto* dim = op_cmd->add_subcommand("dim", "expected dimension from the grading data");
        auto ins = std::make_shared<std::string>();
        auto outs = std::make_shared<std::string>();
        auto chi = std::make_shared<int>(0);
        auto d = std::make_shared<int>(2);
        dim->add_option("--in", *ins, "incoming indices, comma list (or a single sum)");
        dim->add_option("--out", *outs, "outgoing indices, comma list (or a single sum)");
        dim->add_option("--chi", *chi, "Euler characteristic")->required();
        dim->add_option("--d", *d, "manifold dimension (default 2)");
        dim->callback([&out, ins, outs, chi, d] {
            DimensionQuery q;
            q.in_indices = parse_ints(*ins);
            q.out_indices = parse_ints(*outs);
            q.chi = *chi;
            q.d = *d;
            out << expected_dimension_loopspace(q) << "\n";
        });

        auto* inv = op_cmd->add_subcommand("check-invariance", "compare the tables of two "
                                                               "structures related by collapse");
        auto afile = std::make_shared<std::string>();
        auto bfile = std::make_shared<std::string>();
        auto icfg = std::make_shared<std::string>();
        inv->add_option("first", *afile, "metric structure file")->required();
        inv->add_option("second", *bfile, "metric structure file")->required();
        inv->add_option("--config", *icfg, "backend config file")->required();
        inv->callback([&out, afile, bfile, icfg] {
            MetricStructure a = load_structure(*afile);
            MetricStructure b = load_structure(*bfile);
            Backend bk = load_backend_config(*icfg);
            std::map<std::string, std::string> rename;
            std::set<std::string> la, lb;
            for (const auto& [v, in] : a.graph.leaves) (void)in, la.insert(v);
            for (const auto& [v, in] : b.graph.leaves) (void)in, lb.insert(v);
            if (la != lb) {
                // leaves are named differently: find the collapse that
                // carries one graph onto the other
                auto leaf_rename = [](const GraphMorphism& m, bool invert) {
                    std::map<std::string, std::string> r;
                    for (const auto& [v, in] : m.source.leaves) {
                        (void)in;
                        if (invert)
                            r[m.vertex_map.at(v)] = v;
                        else
                            r[v] = m.vertex_map.at(v);
                    }
                    return r;
                };
                try {
                    GraphMorphism m = infer_collapse_morphism(a.graph, b.graph);
                    if (!validate_morphism(m).empty()) throw domain_error("invalid");
                    rename = leaf_rename(m, false);
                } catch (const domain_error&) {
                    GraphMorphism m = infer_collapse_morphism(b.graph, a.graph);
                    auto issues = validate_morphism(m);
                    if (!issues.empty())
                        throw domain_error("no collapse relates the two graphs: " +
                                           issues.front());
                    rename = leaf_rename(m, true);
                }
            }
            auto rep = check_homotopy_invariance(a, b, bk, rename);
            out << "invariant=" << (rep.equal ? "yes" : "no") << "\n";
            for (const auto& m : rep.mismatches) out << "mismatch " << m << "\n";
        });

        auto* glu = op_cmd->add_subcommand("check-gluing", "compare the contracted composite "
                                                           "table against the glued one");
        auto g1 = std::make_shared<std::string>();
        auto g2 = std::make_shared<std::string>();
        auto match = std::make_shared<std::string>();
        auto gcfg = std::make_shared<std::string>();
        glu->add_option("first", *g1, "metric structure file")->required();
        glu->add_option("second", *g2, "metric structure file")->required();
        glu->add_option("--match", *match, "comma list <out-leaf>=<in-leaf>")->required();
        glu->add_option("--config", *gcfg, "backend config file")->required();
        glu->callback([&out, g1, g2, match, gcfg] {
            MetricStructure s1 = load_structure(*g1);
            MetricStructure s2 = load_structure(*g2);
            Backend bk = load_backend_config(*gcfg);
            auto rep = check_gluing(s1, s2, bk, parse_matching(*match));
            out << "gluing=" << (rep.equal ? "consistent" : "inconsistent") << "\n";
            for (const auto& m : rep.mismatches) out << "mismatch " << m << "\n";
        });
    }

    // cylinder -----------------------------------------------------------------
    auto* cyl_cmd = app.add_subcommand("cylinder", "mapping cylinders over boundary cycles");
    cyl_cmd->require_subcommand(1);
    {
        auto* build = cyl_cmd->add_subcommand("build", "tile the boundary cycles of a marked "
                                                       "fat graph with metric edges");
        auto file = std::make_shared<std::string>();
        build->add_option("file", *file, "fat graph file with length lines")->required();
        build->callback([&out, file] {
            std::string text = read_file(*file);
            FatGraph fg = parse_fat_graph(text);
            MetricStructure ms = parse_structure(text);
            CylinderComplex cx = build_mapping_cylinder(fg, ms.lengths);
            for (size_t i = 0; i < cx.cylinders.size(); i++) {
                const Cylinder& c = cx.cylinders[i];
                out << "cylinder " << i << " " << (c.incoming ? "in" : "out")
                    << " circumference=" << g12(c.circumference) << "\n";
                for (const auto& tile : c.word)
                    out << "  " << to_string(tile.edge) << " [" << g12(tile.offset_begin) << ","
                        << g12(tile.offset_end) << ")\n";
            }
        });
    }

    // plot ----------------------------------------------------------------------
    auto* plot_cmd = app.add_subcommand("plot", "trajectory export");
    plot_cmd->require_subcommand(1);
    {
        auto* traj = plot_cmd->add_subcommand("trajectory", "integrate one trajectory and "
                                                            "export CSV or SVG");
        auto cfg = std::make_shared<std::string>();
        auto key = std::make_shared<std::string>();
        auto x0s = std::make_shared<std::string>();
        auto T = std::make_shared<double>(0.0);
        auto backward = std::make_shared<bool>(false);
        auto format = std::make_shared<std::string>();
        auto outfile = std::make_shared<std::string>();
        traj->add_option("--config", *cfg, "backend config file")->required();
        traj->add_option("--function", *key, "catalog key (defaults to the primary)");
        traj->add_option("--x0", *x0s, "start point, comma list")->required();
        traj->add_option("--t", *T, "duration")->required();
        traj->add_flag("--backward", *backward, "integrate against the flow");
        traj->add_option("--format", *format, "csv or svg (default from the output name)");
        traj->add_option("-o,--output", *outfile, "write here instead of stdout");
        traj->callback([&out, cfg, key, x0s, T, backward, format, outfile] {
            Backend bk = load_backend_config(*cfg);
            MorseBackend mb = make_morse_backend(bk, key->empty() ? bk.primary : *key);
            std::vector<double> c = parse_doubles(*x0s);
            if (static_cast<int>(c.size()) != mb.manifold.ambient())
                throw domain_error("x0 wants " + std::to_string(mb.manifold.ambient()) +
                                   " coordinates");
            P3 x0{c[0], c[1], c.size() > 2 ? c[2] : 0.0};
            Trajectory tr = integrate_trajectory(mb, x0, *T, !*backward);
            std::string fmt = *format;
            if (fmt.empty()) {
                bool svg = outfile->size() > 4 &&
                           outfile->compare(outfile->size() - 4, 4, ".svg") == 0;
                fmt = svg ? "svg" : "csv";
            }
            Sink sink(*outfile, out);
            std::ostream& os = sink.stream();
            if (fmt == "svg") {
                os << svg_trajectory(mb.manifold, tr);
            } else if (fmt == "csv") {
                os << (mb.manifold.ambient() == 2 ? "t,x1,x2" : "t,x1,x2,x3") << "\n";
                for (const auto& [t, p] : tr.samples)
                    os << g12(t) << "," << fmt_point(mb.manifold, p) << "\n";
            } else {
                throw domain_error("unknown format: " + fmt);
            }
        });
    }

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const invariant_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace graphflow::cli
