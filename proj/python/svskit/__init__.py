"""Singing-voice synthesis toolkit: score construction, log-mel features,
shallow-diffusion refinement, phase-retrieval vocoding, and objective
metrics. The heavy lifting lives in the compiled ``_core`` extension."""

from ._core import (  # noqa: F401
    MelConfig,
    MusicScore,
    PitchTrackerConfig,
    DiffusionSchedule,
    REST_NOTE,
    SAMPLE_RATE,
    audio_digest,
    ccc,
    cosine_similarity,
    denormalize_mel,
    extract_f0,
    griffin_lim,
    hz_to_midi,
    interpolate_unvoiced,
    logf0_rmse,
    make_schedule,
    mcd_db,
    mel_cepstrum,
    mel_spectrogram,
    normalize_mel,
    parse_score,
    parse_score_file,
    pca_2d,
    pitch_loss,
    pseudo_embedding,
    q_sample,
    read_tensor,
    read_wav,
    reverse_step,
    sample,
    segment_on_silence,
    step_embedding,
    style_loss,
    vuv_agreement,
    write_score,
    write_score_file,
    write_tensor,
    write_wav,
)

__version__ = "0.1.0"
