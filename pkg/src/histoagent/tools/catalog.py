"""The default tool catalog: 49 tools across seven categories.

Three nuclei contour measures compute for real (see geometry.py); everything
else plays back recorded results through a FixtureStore.  Descriptors carry
the model-facing documentation, so wording here is what the agent reads.
"""

from __future__ import annotations

from pathlib import Path

from . import geometry
from .fixtures import FixtureStore, unavailable_tool
from .registry import ToolBinding, ToolDescriptor, ToolParam, ToolRegistry

P = ToolParam

CATEGORIES = (
    "histology_roi",
    "dataset_check",
    "dataset_pipeline",
    "docs_retriever",
    "nuclei_contour",
    "wsi_analysis",
    "wsi_classification",
)

_OP_LOG = ("operation_log", "Human-readable log of what the tool did.")


def _histology_roi() -> list[ToolDescriptor]:
    return [
        ToolDescriptor(
            name="caption_single_histology_image_tool",
            category="histology_roi",
            description=(
                "Generate a morphology-focused caption for a single histology "
                "region-of-interest image."
            ),
            params=(P("path_to_image", "str", "Path to the ROI image file."),),
            returns=(("caption", "Free-text description of the tissue shown."),),
        ),
        ToolDescriptor(
            name="caption_and_summarize_set_of_histology_images_tool",
            category="histology_roi",
            description=(
                "Caption each image in a set of histology ROIs, then produce a "
                "single summary across all of them. Useful when a region has "
                "been split into several fields of view."
            ),
            params=(
                P("paths_to_images", "list", "Paths of the ROI images to describe."),
                P(
                    "summary_focus",
                    "str",
                    "Optional aspect the summary should concentrate on.",
                    default=None,
                ),
            ),
            returns=(
                ("captions", "Per-image captions, in input order."),
                ("summary", "One combined description of the whole set."),
            ),
        ),
        ToolDescriptor(
            name="score_single_histology_image_using_text_tool",
            category="histology_roi",
            description=(
                "Score one histology image against a list of text class "
                "descriptions and return a normalized probability per class."
            ),
            params=(
                P("path_to_image", "str", "Path to the ROI image file."),
                P(
                    "classes_with_text",
                    "list",
                    "Class descriptions, each formatted as 'name: description'.",
                ),
            ),
            returns=(
                ("scores", "List of 'class: probability' strings, one per class."),
            ),
        ),
        ToolDescriptor(
            name="encode_histology_roi_tool",
            category="histology_roi",
            description=(
                "Embed a histology ROI into a feature vector and write it to "
                "the job directory."
            ),
            params=(
                P("path_to_image", "str", "Path to the ROI image file."),
                P("job_dir", "str", "Directory for outputs.", keyed=False),
            ),
            returns=(
                ("embedding_file", "Path of the saved embedding."),
                ("embedding_dim", "Dimensionality of the embedding."),
                _OP_LOG,
            ),
        ),
    ]


def _dataset_check() -> list[ToolDescriptor]:
    src = P("wsi_source", "str", "Directory containing the whole slide images.")
    job = P("job_dir", "str", "Job directory holding prior pipeline outputs.", keyed=False)
    return [
        ToolDescriptor(
            name="dataset_of_wsi_get_valid_slide_paths_tool",
            category="dataset_check",
            description=(
                "List the readable whole slide images in a dataset directory, "
                "skipping files that cannot be opened as slides."
            ),
            params=(src,),
            returns=(
                ("slide_paths", "Paths of the valid slides."),
                ("number_of_slides", "How many valid slides were found."),
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_check_tissue_segmentation_exists_tool",
            category="dataset_check",
            description=(
                "Check whether every slide in the dataset already has a tissue "
                "segmentation result in the job directory."
            ),
            params=(src, job),
            returns=(
                ("all_present", "True when no slide is missing a segmentation."),
                ("missing", "Slide names without a segmentation."),
                ("number_checked", "How many slides were checked."),
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_check_patch_coordinates_exist_and_schema_tool",
            category="dataset_check",
            description=(
                "Check that patch coordinates exist for every slide and that "
                "the stored arrays have the expected schema."
            ),
            params=(src, job),
            returns=(
                ("all_present", "True when every slide has patch coordinates."),
                ("schema_valid", "True when stored arrays match the schema."),
                ("missing", "Slide names without coordinates."),
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_check_patch_features_exist_and_schema_tool",
            category="dataset_check",
            description=(
                "Check that patch-level features exist for every slide and "
                "conform to the expected schema."
            ),
            params=(src, job),
            returns=(
                ("all_present", "True when every slide has patch features."),
                ("schema_valid", "True when stored features match the schema."),
                ("missing", "Slide names without features."),
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_check_slide_features_exist_and_schema_tool",
            category="dataset_check",
            description=(
                "Check that slide-level features exist for every slide and "
                "conform to the expected schema."
            ),
            params=(src, job),
            returns=(
                ("all_present", "True when every slide has slide features."),
                ("schema_valid", "True when stored features match the schema."),
                ("missing", "Slide names without features."),
            ),
        ),
    ]


def _dataset_pipeline() -> list[ToolDescriptor]:
    return [
        ToolDescriptor(
            name="dataset_of_wsi_tissue_segmentation_tool",
            category="dataset_pipeline",
            description=(
                "Run tissue-versus-background segmentation for every whole "
                "slide image in a dataset. Segmentation contours are saved as "
                "GeoJSON together with overlay JPEGs and slide thumbnails for "
                "visual inspection."
            ),
            notes=(
                "Processes every valid slide under wsi_source unless "
                "custom_list_of_wsis narrows the selection.",
                "Existing segmentations in the job directory are reused, so "
                "re-running is cheap.",
                "Batches of slides are processed together; lower batch_size "
                "if memory is tight.",
            ),
            prerequisites=(
                "wsi_source must exist and contain at least one readable "
                "whole slide image.",
                "job_dir must be writable; it is created when absent.",
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P(
                    "custom_list_of_wsis",
                    "list",
                    "Optional subset of slide names to process.",
                    default=None,
                ),
                P("batch_size", "int", "Slides per processing batch.", default=32),
            ),
            returns=(
                ("dir_with_geojson_contours", "Directory of per-slide GeoJSON contours."),
                ("dir_with_tissue_contours_jpg", "Directory of contour overlay JPEGs."),
                ("dir_with_slide_thumbnails", "Directory of slide thumbnails."),
                ("tissue_segmentation_log_file", "Path of the segmentation log."),
                ("tissue_segmentation_config_file", "Path of the config used."),
                ("number_of_processed_segmentations", "How many slides were segmented."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_patch_coordinate_extraction_tool",
            category="dataset_pipeline",
            description=(
                "Extract tissue patch coordinates for every slide in a "
                "dataset at the requested patch size and magnification."
            ),
            prerequisites=(
                "Tissue segmentation must already exist in the job directory.",
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("patch_size", "int", "Patch edge length in pixels.", default=256),
                P("magnification", "int", "Target magnification level.", default=20),
                P("overlap", "int", "Overlap between neighboring patches.", default=0),
            ),
            returns=(
                ("dir_with_patch_coordinates", "Directory of per-slide coordinate files."),
                ("number_of_processed_slides", "How many slides were processed."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_patch_features_extraction_tool",
            category="dataset_pipeline",
            description=(
                "Compute patch-level feature vectors for every slide in a "
                "dataset with the selected patch encoder."
            ),
            prerequisites=(
                "Patch coordinates must already exist in the job directory.",
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("patch_encoder", "str", "Patch encoder model name.", default="conch_v15"),
                P("batch_size", "int", "Patches per inference batch.", default=32),
            ),
            returns=(
                ("dir_with_patch_features", "Directory of per-slide feature files."),
                ("feature_dim", "Dimensionality of each patch feature."),
                ("number_of_processed_slides", "How many slides were processed."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_slide_features_extraction_tool",
            category="dataset_pipeline",
            description=(
                "Aggregate patch features into one slide-level feature vector "
                "per slide with the selected slide encoder."
            ),
            prerequisites=(
                "Patch features must already exist in the job directory.",
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("slide_encoder", "str", "Slide encoder model name.", default="titan"),
                P("batch_size", "int", "Slides per inference batch.", default=32),
            ),
            returns=(
                ("dir_with_slide_features", "Directory of per-slide feature files."),
                ("feature_dim", "Dimensionality of each slide feature."),
                ("number_of_processed_slides", "How many slides were processed."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="dataset_of_wsi_create_score_heatmap_tool",
            category="dataset_pipeline",
            description=(
                "Render patch score heatmaps over slide thumbnails for every "
                "slide with scores in the given file."
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("scores_file", "str", "File of per-patch scores to visualize."),
                P("colormap", "str", "Matplotlib colormap name.", default="viridis"),
            ),
            returns=(
                ("dir_with_heatmaps", "Directory of rendered heatmap images."),
                ("number_of_processed_slides", "How many slides were rendered."),
                _OP_LOG,
            ),
        ),
    ]


def _docs_retriever() -> list[ToolDescriptor]:
    def retriever(name: str, library: str) -> ToolDescriptor:
        return ToolDescriptor(
            name=name,
            category="docs_retriever",
            description=(
                f"Retrieve the most relevant passages from the {library} "
                "documentation for a natural language query."
            ),
            params=(
                P("query", "str", "What to look up."),
                P("top_k", "int", "Number of passages to return.", default=3),
            ),
            returns=(
                ("passages", "Matching documentation passages, most relevant first."),
                ("source", "Name of the documentation set searched."),
            ),
        )

    return [
        retriever("trident_docs_retriever", "slide preprocessing pipeline"),
        retriever("lazyslide_docs_retriever", "slide analysis toolkit"),
        retriever("hovernet_docs_retriever", "nuclei segmentation model"),
    ]


def _nuclei_contour() -> list[ToolDescriptor]:
    return [
        ToolDescriptor(
            name="segment_and_classify_nuclei_in_histology_roi_tool",
            category="nuclei_contour",
            description=(
                "Segment every nucleus in a histology ROI and classify each "
                "into a cell type. Contours are pixel coordinates in the "
                "input image."
            ),
            params=(
                P("path_to_image", "str", "Path to the ROI image file."),
                P("job_dir", "str", "Optional directory for overlays.", default=None, keyed=False),
            ),
            returns=(
                ("nuclei", "Per-nucleus records with contour, centroid, and type."),
                ("number_of_nuclei", "Total nuclei found."),
                ("type_counts", "Count of nuclei per predicted type."),
            ),
        ),
        geometry.AREA_DESCRIPTOR,
        geometry.PERIMETER_DESCRIPTOR,
        geometry.HULL_DESCRIPTOR,
    ]


def _wsi_analysis() -> list[ToolDescriptor]:
    wsi = P("path_to_wsi", "str", "Path to the whole slide image.")
    zarr = P("path_to_wsi_zarr", "str", "Path to the slide's zarr store.")
    job = P("job_dir", "str", "Directory to write outputs into.", keyed=False)
    return [
        ToolDescriptor(
            name="visualize_text_prompt_similarity_on_wsi_tool",
            category="wsi_analysis",
            description=(
                "Paint a similarity map over the slide showing where tissue "
                "matches a free-text prompt."
            ),
            params=(wsi, P("text_prompt", "str", "Description to localize."), job),
            returns=(("similarity_map_file", "Path of the rendered map."), _OP_LOG),
        ),
        ToolDescriptor(
            name="predict_wsi_label_tool",
            category="wsi_analysis",
            description=(
                "Predict a slide-level label from a list of candidate labels "
                "using the slide feature vector."
            ),
            params=(
                wsi,
                P("candidate_labels", "list", "Labels to choose between."),
            ),
            returns=(
                ("predicted_label", "The highest scoring label."),
                ("probabilities", "Per-label probabilities."),
            ),
        ),
        ToolDescriptor(
            name="generate_wsi_report_with_prism_tool",
            category="wsi_analysis",
            description="Generate a structured findings report for a whole slide image.",
            params=(wsi,),
            returns=(("report", "Generated report text."),),
        ),
        ToolDescriptor(
            name="caption_single_wsi_tool",
            category="wsi_analysis",
            description="Generate a short caption describing a whole slide image.",
            params=(wsi,),
            returns=(("caption", "Free-text description of the slide."),),
        ),
        ToolDescriptor(
            name="score_tiles_by_text_in_a_wsi_tool",
            category="wsi_analysis",
            description=(
                "Score every tissue tile in a slide against a text prompt and "
                "report the best matching tiles."
            ),
            params=(
                wsi,
                P("text_prompt", "str", "Description to score tiles against."),
                job,
                P("top_k", "int", "Number of top tiles to report.", default=10),
            ),
            returns=(
                ("scores_file", "Path of the per-tile score table."),
                ("top_tiles", "Coordinates and scores of the best tiles."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="retrieve_properties_from_wsi_tool",
            category="wsi_analysis",
            description=(
                "Read slide metadata: dimensions, microns per pixel, "
                "objective magnification, and available pyramid levels."
            ),
            params=(wsi,),
            returns=(("properties", "Map of slide properties."),),
        ),
        ToolDescriptor(
            name="extract_tissue_in_wsi_tool",
            category="wsi_analysis",
            description="Segment tissue from background for one slide.",
            params=(wsi, job),
            returns=(
                ("tissue_contours_file", "Path of the saved contours."),
                ("tissue_percent", "Fraction of the slide area that is tissue."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="extract_tissue_tiles_in_wsi_tool",
            category="wsi_analysis",
            description="Compute tissue tile coordinates for one slide.",
            prerequisites=("Tissue segmentation must exist for the slide.",),
            params=(
                wsi,
                job,
                P("tile_size", "int", "Tile edge length in pixels.", default=256),
                P("magnification", "int", "Target magnification level.", default=20),
            ),
            returns=(
                ("tile_coordinates_file", "Path of the saved coordinates."),
                ("number_of_tiles", "How many tiles were kept."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="extract_patch_features_in_wsi_tool",
            category="wsi_analysis",
            description="Compute patch features for one slide with the selected encoder.",
            prerequisites=("Tile coordinates must exist for the slide.",),
            params=(
                wsi,
                job,
                P("patch_encoder", "str", "Patch encoder model name.", default="conch_v15"),
            ),
            returns=(
                ("patch_features_file", "Path of the saved features."),
                ("feature_dim", "Dimensionality of each patch feature."),
                ("number_of_patches", "How many patches were encoded."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="encode_wsi_tool",
            category="wsi_analysis",
            description="Aggregate patch features into one slide-level feature vector.",
            prerequisites=("Patch features must exist for the slide.",),
            params=(
                wsi,
                job,
                P("slide_encoder", "str", "Slide encoder model name.", default="titan"),
            ),
            returns=(
                ("slide_feature_file", "Path of the saved slide feature."),
                ("feature_dim", "Dimensionality of the slide feature."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="check_tissue_segmentation_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether the slide's zarr store holds a tissue segmentation.",
            params=(zarr,),
            returns=(
                ("present", "True when the segmentation key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="check_tile_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether tile coordinates for the given settings exist in the zarr store.",
            params=(
                zarr,
                P("tile_size", "int", "Tile edge length in pixels.", default=256),
                P("magnification", "int", "Target magnification level.", default=20),
            ),
            returns=(
                ("present", "True when the tile key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="check_patch_features_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether patch features from the given encoder exist in the zarr store.",
            params=(
                zarr,
                P("patch_encoder", "str", "Patch encoder model name.", default="conch_v15"),
            ),
            returns=(
                ("present", "True when the feature key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="check_slide_features_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether slide features from the given encoder exist in the zarr store.",
            params=(
                zarr,
                P("slide_encoder", "str", "Slide encoder model name.", default="titan"),
            ),
            returns=(
                ("present", "True when the feature key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="check_clustering_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether a clustering assignment exists in the zarr store.",
            params=(zarr,),
            returns=(
                ("present", "True when the clustering key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="check_reduction_key_in_wsi_tool",
            category="wsi_analysis",
            description="Check whether a reduced embedding exists in the zarr store.",
            params=(zarr,),
            returns=(
                ("present", "True when the reduction key exists."),
                ("key", "The key that was checked."),
            ),
        ),
        ToolDescriptor(
            name="access_zarr_hierarchy",
            category="wsi_analysis",
            description="List the group and array hierarchy of a slide's zarr store.",
            params=(zarr,),
            returns=(("hierarchy", "Nested description of groups and arrays."),),
        ),
        ToolDescriptor(
            name="read_zarr_data_tool",
            category="wsi_analysis",
            description=(
                "Read an array (or a slice of it) from a slide's zarr store "
                "and return a compact summary with the values."
            ),
            params=(
                zarr,
                P("key", "str", "Array key inside the store."),
                P("slice_spec", "str", "Optional slice such as '0:10'.", default=None),
            ),
            returns=(
                ("data", "The requested values."),
                ("shape", "Shape of the stored array."),
                ("dtype", "Element type of the stored array."),
            ),
        ),
        ToolDescriptor(
            name="visualize_wsi_tool",
            category="wsi_analysis",
            description="Render a viewable image of the slide, optionally with tissue contours.",
            params=(
                wsi,
                job,
                P("show_contours", "bool", "Overlay tissue contours.", default=False),
            ),
            returns=(("image_file", "Path of the rendered image."), _OP_LOG),
        ),
        ToolDescriptor(
            name="reduce_single_wsi_patch_feature_space_tool",
            category="wsi_analysis",
            description="Project a slide's patch features to a low-dimensional embedding.",
            prerequisites=("Patch features must exist in the zarr store.",),
            params=(
                zarr,
                job,
                P("method", "str", "Reduction method name.", default="umap"),
                P("n_components", "int", "Output dimensionality.", default=2),
            ),
            returns=(
                ("reduction_key", "Zarr key of the stored embedding."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="run_leiden_clustering_tool",
            category="wsi_analysis",
            description="Cluster a slide's patch features into morphological groups.",
            prerequisites=("Patch features must exist in the zarr store.",),
            params=(
                zarr,
                job,
                P("resolution", "float", "Clustering resolution.", default=1.0),
            ),
            returns=(
                ("clustering_key", "Zarr key of the stored assignments."),
                ("number_of_clusters", "How many clusters were found."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="visualize_morphological_clusters_on_wsi_tool",
            category="wsi_analysis",
            description="Color the slide by cluster assignment to show morphological regions.",
            prerequisites=("A clustering assignment must exist in the zarr store.",),
            params=(zarr, job),
            returns=(("cluster_map_file", "Path of the rendered map."), _OP_LOG),
        ),
        ToolDescriptor(
            name="get_topk_close_patch_coords_to_embedding_space_clusters_tool",
            category="wsi_analysis",
            description=(
                "For each cluster, list the patches closest to its centroid "
                "in embedding space."
            ),
            prerequisites=("A clustering assignment must exist in the zarr store.",),
            params=(
                zarr,
                P("top_k", "int", "Patches to list per cluster.", default=5),
            ),
            returns=(
                ("cluster_representatives", "Per-cluster list of patch coordinates."),
            ),
        ),
        ToolDescriptor(
            name="read_rectangle_region_from_wsi_tool",
            category="wsi_analysis",
            description="Extract a rectangular region from the slide at the given magnification.",
            params=(
                wsi,
                P("x", "int", "Left edge in level-0 pixels."),
                P("y", "int", "Top edge in level-0 pixels."),
                P("width", "int", "Region width in pixels."),
                P("height", "int", "Region height in pixels."),
                P("magnification", "int", "Magnification to read at.", default=20),
                P("job_dir", "str", "Optional directory for the region image.", default=None, keyed=False),
            ),
            returns=(("region_file", "Path of the saved region image."), _OP_LOG),
        ),
        ToolDescriptor(
            name="get_wsi_thumbnail_tool",
            category="wsi_analysis",
            description="Save a small thumbnail of the slide for quick inspection.",
            params=(
                wsi,
                job,
                P("max_dimension", "int", "Longest edge of the thumbnail.", default=1024),
            ),
            returns=(
                ("thumbnail_file", "Path of the saved thumbnail."),
                ("width", "Thumbnail width in pixels."),
                ("height", "Thumbnail height in pixels."),
                _OP_LOG,
            ),
        ),
    ]


def _wsi_classification() -> list[ToolDescriptor]:
    return [
        ToolDescriptor(
            name="prepare_wsi_classification_metadata",
            category="wsi_classification",
            description=(
                "Validate a metadata table for slide classification and write "
                "a cleaned copy with one label per slide."
            ),
            params=(
                P("path_to_metadata", "str", "CSV of slide names and labels."),
                P("label_column", "str", "Column holding the class label."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
            ),
            returns=(
                ("metadata_file", "Path of the cleaned metadata table."),
                ("number_of_slides", "Slides kept after cleaning."),
                ("class_counts", "Slides per class label."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="create_wsi_classification_splits",
            category="wsi_classification",
            description=(
                "Create stratified train/validation/test splits from cleaned "
                "classification metadata."
            ),
            prerequisites=("Cleaned metadata must exist (prepare step).",),
            params=(
                P("metadata_file", "str", "Cleaned metadata table."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("n_folds", "int", "Number of cross-validation folds.", default=5),
                P("test_fraction", "float", "Held-out test fraction.", default=0.2),
                P("seed", "int", "Split RNG seed.", default=42),
            ),
            returns=(
                ("splits_file", "Path of the saved split assignment."),
                ("fold_sizes", "Slides per fold."),
                _OP_LOG,
            ),
        ),
        ToolDescriptor(
            name="train_test_wsi_classification_mil_model",
            category="wsi_classification",
            description=(
                "Train a multiple-instance-learning classifier on slide "
                "features and report held-out test metrics."
            ),
            prerequisites=(
                "Slide features and split assignments must already exist.",
            ),
            params=(
                P("wsi_source", "str", "Directory containing the whole slide images."),
                P("splits_file", "str", "Split assignment to train against."),
                P("job_dir", "str", "Directory to write outputs into.", keyed=False),
                P("mil_model", "str", "MIL architecture name.", default="abmil"),
                P("max_epochs", "int", "Training epoch cap.", default=20),
            ),
            returns=(
                ("test_auc", "Area under the ROC curve on the test split."),
                ("test_balanced_accuracy", "Balanced accuracy on the test split."),
                ("checkpoint_file", "Path of the best model checkpoint."),
                _OP_LOG,
            ),
        ),
    ]


WEB_SEARCH_DESCRIPTOR = ToolDescriptor(
    name="web_search_tool",
    category="web_search",
    description=(
        "Search the web for supporting literature. Offline builds return a "
        "stub response instead of live results."
    ),
    params=(
        P("query", "str", "Search query."),
        P("top_k", "int", "Number of results to return.", default=5),
    ),
    returns=(
        ("results", "Search hits with title and snippet."),
        ("live", "False when the stub produced the response."),
    ),
)


def _web_search_stub(**args):
    return {
        "results": [
            {
                "title": "offline stub",
                "snippet": f"web search is stubbed in this build; query was: {args.get('query', '')}",
            }
        ],
        "live": False,
    }


def all_descriptors() -> list[ToolDescriptor]:
    return (
        _histology_roi()
        + _dataset_check()
        + _dataset_pipeline()
        + _docs_retriever()
        + _nuclei_contour()
        + _wsi_analysis()
        + _wsi_classification()
    )


_REAL_IMPLS = {
    "get_contour_area": geometry.get_contour_area,
    "get_contour_perimeter": geometry.get_contour_perimeter,
    "get_contour_convex_hull": geometry.get_contour_convex_hull,
}


def build_default_registry(
    fixture_root: Path | str | None = None,
    dataset_root: Path | str | None = None,
    include_web_search: bool = False,
) -> ToolRegistry:
    """Assemble and freeze the default 49-tool registry.

    Without a fixture root the playback tools still register, but calling
    one raises a FixtureMiss explaining that no store is configured.
    """
    store = FixtureStore(fixture_root, dataset_root) if fixture_root is not None else None
    registry = ToolRegistry()
    for descriptor in all_descriptors():
        impl = _REAL_IMPLS.get(descriptor.name)
        if impl is None:
            impl_fn = store.bind(descriptor) if store is not None else unavailable_tool(descriptor)
        else:
            impl_fn = impl
        registry.register(ToolBinding(descriptor=descriptor, func=impl_fn))
    if include_web_search:
        registry.register(
            ToolBinding(descriptor=WEB_SEARCH_DESCRIPTOR, func=_web_search_stub)
        )
    registry.freeze()
    return registry
