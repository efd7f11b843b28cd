import openai
from tenacity import retry, stop_after_attempt, wait_exponential


@retry(wait=wait_exponential(multiplier=1, min=2, max=30), stop=stop_after_attempt(5))
def summarize(ticket_text, deployment="support-summarizer"):
    response = openai.ChatCompletion.create(
        engine=deployment,
        messages=[{"role": "user", "content": f"Summarize: {ticket_text}"}],
        temperature=0.2,
        max_tokens=400,
    )
    return response.choices[0].message["content"]
