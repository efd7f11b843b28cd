import openai


def summarize(ticket_text, deployment="support-summarizer"):
    response = openai.ChatCompletion.create(
        engine=deployment,
        messages=[{"role": "user", "content": f"Summarize: {ticket_text}"}],
        temperature=0.2,
        max_tokens=400,
    )
    return response.choices[0].message["content"]
