// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

// Python bindings. Structured results cross the boundary as JSON and come
// out as plain dicts and lists, matching the HTTP wire format.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "attrag/chunking.hpp"
#include "attrag/citation.hpp"
#include "attrag/config.hpp"
#include "attrag/dates.hpp"
#include "attrag/error.hpp"
#include "attrag/generation.hpp"
#include "attrag/indexing.hpp"
#include "attrag/ingest.hpp"
#include "attrag/mock_providers.hpp"
#include "attrag/retrieval.hpp"
#include "attrag/service.hpp"
#include "attrag/wire.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

attrag::Format format_arg(const std::string& name) {
    auto f = attrag::parse_format(name);
    if (!f) throw attrag::Error(attrag::ErrorCode::kUnsupportedFormat, "unknown format '" + name + "'");
    return *f;
}

attrag::Date date_arg(const std::string& iso) {
    auto d = attrag::parse_iso_date(iso);
    if (!d) throw attrag::Error(attrag::ErrorCode::kInvalidArgument, "expected YYYY-MM-DD, got '" + iso + "'");
    return *d;
}

std::vector<attrag::Chunk> chunks_arg(const py::list& chunks) {
    std::vector<attrag::Chunk> out;
    for (const auto& c : chunks) out.push_back(attrag::chunk_from_json(from_py(c)));
    return out;
}

json structured_json(const attrag::StructuredAnswer& a) {
    json sentences = json::array();
    for (const auto& s : a.sentences) {
        sentences.push_back({{"index", s.index},
                             {"text", s.text},
                             {"kind", attrag::sentence_kind_name(s.kind)},
                             {"opinion_bearing", s.opinion_bearing}});
    }
    json sections = json::array();
    for (const auto& sec : a.sections) {
        sections.push_back({{"heading", sec.heading ? json(a.heading_text(sec)) : json(nullptr)}, {"body", sec.body}});
    }
    return {{"summary", a.summary}, {"sections", sections}, {"sentences", sentences}};
}

// The JSON configuration document with the data directory forced.
attrag::ServiceConfig service_config(const std::string& data_dir, const py::object& config) {
    json j = config.is_none() ? json::object() : from_py(config);
    j["data_dir"] = data_dir;
    return attrag::parse_config(j);
}

class PyService {
  public:
    PyService(const std::string& data_dir, const py::object& config) {
        attrag::ServiceConfig cfg = service_config(data_dir, config);
        auto providers = attrag::make_providers(cfg);
        service_ = std::make_unique<attrag::Service>(std::move(cfg), std::move(providers));
    }

    py::object create_corpus(const std::string& name, const py::object& chunk_config) {
        return to_py(service_->create_corpus(name, from_py(chunk_config)));
    }
    py::object list_corpora() const { return to_py(service_->list_corpora()); }
    py::object get_corpus(const std::string& id) const { return to_py(service_->get_corpus(id)); }
    void delete_corpus(const std::string& id) { service_->delete_corpus(id); }

    py::object upload_document(const std::string& corpus_id, const std::string& filename, const py::bytes& content,
                               const std::optional<std::string>& format,
                               const std::map<std::string, std::string>& metadata) {
        std::optional<attrag::Format> f;
        if (format) f = format_arg(*format);
        return to_py(service_->upload_document(corpus_id, filename, std::string(content), f, metadata));
    }

    py::object build_index(const std::string& corpus_id) {
        json out;
        {
            py::gil_scoped_release release;
            out = service_->build_index(corpus_id);
        }
        return to_py(out);
    }

    py::object list_chunks(const std::string& corpus_id) const { return to_py(service_->list_chunks(corpus_id)); }

    py::object create_conversation(const std::string& corpus_id, const py::object& retrieval_config,
                                   const py::object& generation_config) {
        return to_py(service_->create_conversation(corpus_id, from_py(retrieval_config), from_py(generation_config)));
    }
    py::object get_conversation(const std::string& id) const { return to_py(service_->get_conversation(id)); }

    py::object ask(const std::string& conversation_id, const std::string& query) {
        attrag::TurnOutcome out;
        {
            py::gil_scoped_release release;
            out = service_->handle_message(conversation_id, query);
        }
        json events = json::array();
        for (const auto& e : out.events) events.push_back(e.to_json());
        return to_py({{"ok", out.ok},
                      {"answer", out.answer},
                      {"error_code", out.error_code},
                      {"error_message", out.error_message},
                      {"events", events}});
    }

  private:
    std::unique_ptr<attrag::Service> service_;
};

}  // namespace

PYBIND11_MODULE(_attrag, m) {
    m.doc() = "Attributed retrieval-augmented answering";

    // Owned by the module for the interpreter's lifetime.
    static PyObject* error_type = PyErr_NewException("attrag._attrag.AttragError", PyExc_RuntimeError, nullptr);
    m.attr("AttragError") = py::handle(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const attrag::Error& e) {
            const std::string code(attrag::error_code_name(e.code()));
            py::object instance = py::handle(error_type)(code + ": " + e.what());
            instance.attr("code") = code;
            PyErr_SetObject(error_type, instance.ptr());
        }
    });

    m.def(
        "parse_document",
        [](const py::bytes& raw, const std::string& format, const std::map<std::string, std::string>& metadata) {
            return to_py(attrag::to_json(attrag::parse_document(std::string(raw), format_arg(format), metadata)));
        },
        py::arg("raw"), py::arg("format"), py::arg("metadata") = std::map<std::string, std::string>{},
        "Parses raw bytes (text, markdown, html or json) into a document dict.");

    m.def(
        "segment_sentences",
        [](const std::string& body) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& s : attrag::segment_sentences(body)) out.emplace_back(s.start, s.end);
            return out;
        },
        py::arg("body"), "Sentence spans as (start, end) UTF-8 byte offsets.");

    m.def(
        "normalize_relative_dates",
        [](const std::string& text, const std::string& publish_date) {
            return attrag::normalize_relative_dates(text, date_arg(publish_date));
        },
        py::arg("text"), py::arg("publish_date"));

    m.def(
        "chunk_document",
        [](const py::object& doc, const py::object& config, bool enrich, std::size_t dims) {
            const attrag::Document d = attrag::document_from_json(from_py(doc));
            const attrag::ChunkConfig cfg =
                attrag::chunk_config_from_json(config.is_none() ? json::object() : from_py(config));
            attrag::HashingEmbedder embedder(dims);
            json out = json::array();
            for (auto& c : attrag::chunk_document(d, cfg, &embedder)) {
                c = attrag::attach_context_header(std::move(c), d);
                if (enrich) attrag::enrich_chunk(c, d, nullptr);
                out.push_back(attrag::to_json(c));
            }
            return to_py(out);
        },
        py::arg("document"), py::arg("config") = py::none(), py::arg("enrich") = true, py::arg("dims") = 256,
        "Chunks a document dict; semantic chunking uses the offline hashing embedder.");

    py::class_<attrag::SparseIndex>(m, "SparseIndex")
        .def(py::init([](const py::list& chunks) { return attrag::SparseIndex::build(chunks_arg(chunks)); }),
             py::arg("chunks"))
        .def(
            "search",
            [](const attrag::SparseIndex& idx, const std::string& query, std::size_t k) {
                json out = json::array();
                for (const auto& h : idx.search(query, k)) out.push_back(attrag::to_json(h));
                return to_py(out);
            },
            py::arg("query"), py::arg("k") = 10)
        .def("idf", &attrag::SparseIndex::idf)
        .def("__len__", &attrag::SparseIndex::size);

    m.def(
        "rrf_fuse",
        [](const std::vector<std::pair<std::vector<std::string>, double>>& rankings, int k_const) {
            std::vector<attrag::Ranking> rs;
            for (const auto& [ids, weight] : rankings) rs.push_back({ids, weight, {}});
            json out = json::array();
            for (const auto& h : attrag::rrf_fuse(rs, k_const)) out.push_back(attrag::to_json(h));
            return to_py(out);
        },
        py::arg("rankings"), py::arg("k_const") = attrag::kRrfK,
        "Fuses (chunk_ids, weight) rankings by reciprocal rank.");

    m.def(
        "parse_structured_answer", [](const std::string& raw) { return to_py(structured_json(attrag::parse_structured_answer(raw))); },
        py::arg("raw"));

    m.def(
        "annotate_answer",
        [](const std::string& raw, const py::list& evidence, double tau) {
            std::vector<attrag::EvidenceSpan> spans;
            for (const auto& item : evidence) {
                const json e = from_py(item);
                attrag::EvidenceSpan s;
                s.doc_id = e.at("doc_id").get<std::string>();
                s.chunk_id = e.value("chunk_id", "");
                s.start = e.at("start").get<std::size_t>();
                s.end = e.at("end").get<std::size_t>();
                s.text = e.at("text").get<std::string>();
                s.sentence_index = e.value("sentence_index", std::size_t{0});
                spans.push_back(std::move(s));
            }
            const auto answer = attrag::parse_structured_answer(raw);
            attrag::CitationOptions opts;
            opts.tau = tau;
            const auto result = attrag::match_citations(answer, spans, opts);
            const auto groups = attrag::group_citations(result.citations);
            return to_py(attrag::annotated_answer_json(answer, result, groups, attrag::cross_reference(groups),
                                                       [](std::string_view) { return nullptr; }));
        },
        py::arg("raw"), py::arg("evidence"), py::arg("tau") = 0.5,
        "Cites answer sentences against evidence dicts {doc_id, start, end, text}.");

    py::class_<PyService>(m, "Service")
        .def(py::init<const std::string&, const py::object&>(), py::arg("data_dir"), py::arg("config") = py::none())
        .def("create_corpus", &PyService::create_corpus, py::arg("name"), py::arg("chunk_config") = py::none())
        .def("list_corpora", &PyService::list_corpora)
        .def("get_corpus", &PyService::get_corpus, py::arg("corpus_id"))
        .def("delete_corpus", &PyService::delete_corpus, py::arg("corpus_id"))
        .def("upload_document", &PyService::upload_document, py::arg("corpus_id"), py::arg("filename"),
             py::arg("content"), py::arg("format") = py::none(),
             py::arg("metadata") = std::map<std::string, std::string>{})
        .def("build_index", &PyService::build_index, py::arg("corpus_id"))
        .def("list_chunks", &PyService::list_chunks, py::arg("corpus_id"))
        .def("create_conversation", &PyService::create_conversation, py::arg("corpus_id"),
             py::arg("retrieval_config") = py::none(), py::arg("generation_config") = py::none())
        .def("get_conversation", &PyService::get_conversation, py::arg("conversation_id"))
        .def("ask", &PyService::ask, py::arg("conversation_id"), py::arg("query"));
}
