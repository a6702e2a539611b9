import boto3

client = boto3.client("transcribe")
client.start_transcription_job(
    TranscriptionJobName="meeting-02",
    Media={"MediaFileUri": "s3://bucket/meeting.wav"},
    LanguageCode="en-US",
)
